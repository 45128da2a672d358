#include "ffcs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ffcs/errors.hpp"
#include "ffcs/linalg.hpp"

namespace ffcs {

void SolverOptions::validate() const {
  if (!(feasibility_tol > 0.0)) throw ArgumentError("feasibility_tol must be positive");
  if (!(objective_rel_tol > 0.0)) throw ArgumentError("objective_rel_tol must be positive");
  if (max_iterations < 1) throw ArgumentError("max_iterations must be at least 1");
  if (!(penalty_parameter > 0.0)) throw ArgumentError("penalty_parameter must be positive");
  if (!(hard_threshold >= 0.0)) throw ArgumentError("hard_threshold must be non-negative");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iters";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "infeasible";
}

SolveStatus solve_status_from_string(const std::string& s) {
  if (s == "converged") return SolveStatus::Converged;
  if (s == "max_iters") return SolveStatus::MaxIterations;
  if (s == "infeasible") return SolveStatus::Infeasible;
  throw ArgumentError("unknown solve status '" + s + "'");
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Layout {
  std::vector<Index> off;
  std::vector<Index> dim;
};

Layout layout_of(const FusionFrame& f) {
  Layout l;
  l.off = f.offsets();
  l.dim = f.dims();
  return l;
}

double mixed21(const VectorXd& v, const Layout& l) {
  double s = 0.0;
  for (std::size_t j = 0; j < l.dim.size(); ++j) s += v.segment(l.off[j], l.dim[j]).norm();
  return s;
}

VectorXd block_soft(const VectorXd& v, double t, const Layout& l) {
  VectorXd out = VectorXd::Zero(v.size());
  for (std::size_t j = 0; j < l.dim.size(); ++j) {
    const auto seg = v.segment(l.off[j], l.dim[j]);
    const double nrm = seg.norm();
    if (nrm > t) out.segment(l.off[j], l.dim[j]) = (1.0 - t / nrm) * seg;
  }
  return out;
}

std::vector<std::size_t> block_support(const VectorXd& v, const Layout& l, double thr) {
  std::vector<std::size_t> s;
  for (std::size_t j = 0; j < l.dim.size(); ++j)
    if (v.segment(l.off[j], l.dim[j]).norm() > thr) s.push_back(j);
  return s;
}

VectorXd threshold_blocks(VectorXd v, const Layout& l, double thr) {
  for (std::size_t j = 0; j < l.dim.size(); ++j)
    if (v.segment(l.off[j], l.dim[j]).norm() <= thr) v.segment(l.off[j], l.dim[j]).setZero();
  return v;
}

VectorXd mask_blocks(const VectorXd& v, const Layout& l, const std::vector<std::size_t>& keep) {
  VectorXd out = VectorXd::Zero(v.size());
  for (auto j : keep) out.segment(l.off[j], l.dim[j]) = v.segment(l.off[j], l.dim[j]);
  return out;
}

// Max violation of the optimality conditions, all in concatenated form.
double kkt_residual(const VectorXd& c, const VectorXd& atl, const Layout& l, double thr) {
  double worst = 0.0;
  for (std::size_t j = 0; j < l.dim.size(); ++j) {
    const auto cj = c.segment(l.off[j], l.dim[j]);
    const auto gj = atl.segment(l.off[j], l.dim[j]);
    const double nc = cj.norm();
    if (nc > thr)
      worst = std::max(worst, (gj - cj / nc).norm());
    else
      worst = std::max(worst, gj.norm() - 1.0);
  }
  return std::max(worst, 0.0);
}

// Access to the affine set {c : A_U c = y} and the least-squares dual map.
class ConstraintSystem {
public:
  ConstraintSystem(const MeasurementMatrix& a, const FusionFrame& f, const VectorXd& y)
      : a_(a), f_(f), y_(y) {
    const Index rows = a.rows() * f.ambient_dim();
    const Index cols = f.total_dim();
    if (cols <= rows) {
      const MatrixXd g = lifted_gram(a, f);
      if (try_llt(g)) {
        mode_ = Mode::Tall;
        c_ls_ = llt_.solve(apply_lifted_transpose(a, f, y));
        return;
      }
    }
    dense_ = lifted_columns(a, f, full_support(f.size()));
    if (cols > rows) {
      const MatrixXd k = dense_ * dense_.transpose();
      if (try_llt(k)) {
        mode_ = Mode::Wide;
        c_ls_ = dense_.transpose() * llt_.solve(y);
        return;
      }
    }
    mode_ = Mode::Svd;
    Eigen::BDCSVD<MatrixXd> svd(dense_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const double cutoff = sv.size() ? 1e-10 * sv(0) : 0.0;
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    u_ = svd.matrixU().leftCols(r);
    v_ = svd.matrixV().leftCols(r);
    s_ = sv.head(r);
    c_ls_ = v_ * (u_.transpose() * y).cwiseQuotient(s_);
  }

  bool injective() const { return mode_ == Mode::Tall; }
  const VectorXd& least_squares() const { return c_ls_; }

  VectorXd apply(const VectorXd& c) const {
    if (mode_ == Mode::Tall) return apply_lifted(a_, f_, c);
    return dense_ * c;
  }
  VectorXd apply_t(const VectorXd& r) const {
    if (mode_ == Mode::Tall) return apply_lifted_transpose(a_, f_, r);
    return dense_.transpose() * r;
  }

  // Orthogonal projection onto the affine set through c_ls.
  VectorXd project(const VectorXd& v) const {
    switch (mode_) {
      case Mode::Tall: return c_ls_;
      case Mode::Wide: return v - dense_.transpose() * llt_.solve(dense_ * v - y_);
      case Mode::Svd: return v - v_ * (v_.transpose() * v) + c_ls_;
    }
    return c_ls_;
  }

  // Minimum-norm least-squares solution of A_U^T lambda = w.
  VectorXd dual(const VectorXd& w) const {
    switch (mode_) {
      case Mode::Tall: return apply_lifted(a_, f_, llt_.solve(w));
      case Mode::Wide: return llt_.solve(dense_ * w);
      case Mode::Svd: return u_ * (v_.transpose() * w).cwiseQuotient(s_);
    }
    return {};
  }

private:
  enum class Mode { Tall, Wide, Svd };

  static SupportSet full_support(std::size_t n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return SupportSet(std::move(all));
  }

  bool try_llt(const MatrixXd& m) {
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) return false;
    const VectorXd d = llt_.matrixLLT().diagonal();
    const double hi = d.maxCoeff();
    const double lo = d.minCoeff();
    return hi > 0.0 && lo / hi > 1e-6;
  }

  const MeasurementMatrix& a_;
  const FusionFrame& f_;
  VectorXd y_;
  Mode mode_ = Mode::Svd;
  Eigen::LLT<MatrixXd> llt_;
  MatrixXd dense_, u_, v_;
  VectorXd s_;
  VectorXd c_ls_;
};

struct Candidate {
  bool ok = false;
  VectorXd c;
  VectorXd lambda;
  double cert = std::numeric_limits<double>::infinity();
};

// Least squares on the support of z, then a dual matrix that matches the
// block signs there and starts from the ADMM multiplier.
Candidate polish(const MeasurementMatrix& a, const FusionFrame& f, const ConstraintSystem& sys,
                 const VectorXd& y, std::vector<std::size_t> supp, const VectorXd& w,
                 const Layout& l, const SolverOptions& opts, double feas_scale) {
  Candidate out;
  const Index rows = a.rows() * f.ambient_dim();
  for (int pass = 0; pass < 4; ++pass) {
    Index width = 0;
    for (auto j : supp) width += l.dim[j];
    if (width > rows || supp.empty()) return out;
    const MatrixXd b = lifted_columns(a, f, SupportSet(supp));
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(b);
    const VectorXd cs = cod.solve(y);
    if ((b * cs - y).norm() > opts.feasibility_tol * feas_scale) return out;

    std::vector<std::size_t> keep;
    VectorXd c = VectorXd::Zero(f.total_dim());
    VectorXd gs(width);
    Index col = 0;
    for (auto j : supp) {
      const auto seg = cs.segment(col, l.dim[j]);
      const double nrm = seg.norm();
      if (nrm > opts.hard_threshold) {
        keep.push_back(j);
        c.segment(l.off[j], l.dim[j]) = seg;
        gs.segment(col, l.dim[j]) = seg / nrm;
      }
      col += l.dim[j];
    }
    if (keep.size() != supp.size()) {
      supp = std::move(keep);
      continue;
    }
    const VectorXd lam0 = sys.dual(w);
    const MatrixXd bpinv = cod.pseudoInverse();
    const VectorXd lam = lam0 + bpinv.transpose() * (gs - b.transpose() * lam0);
    out.c = c;
    out.lambda = lam;
    out.cert = kkt_residual(c, sys.apply_t(lam), l, opts.hard_threshold);
    out.ok = true;
    return out;
  }
  return out;
}

SolveReport finish(const ConstraintSystem& sys, const FusionFrame& f, const VectorXd& y,
                   const VectorXd& c, const VectorXd& lambda, double cert, SolveStatus status,
                   int iters, const Layout& l) {
  SolveReport rep;
  rep.status = status;
  rep.iterations = iters;
  rep.coefficients = BlockCoefficients::from_concatenated(f, c);
  rep.final_feasibility_residual = (sys.apply(c) - y).norm();
  rep.final_objective = mixed21(c, l);
  rep.multiplier = lambda;
  rep.certificate_residual = cert;
  return rep;
}

VectorXd vec_of(const MeasurementMatrix& a, const FusionFrame& f, const MatrixXd& y) {
  check_compatible(a, f);
  if (y.rows() != a.rows() || y.cols() != f.ambient_dim())
    throw ShapeError("measurements must be n x M");
  if (!y.allFinite()) throw ArgumentError("measurements contain non-finite entries");
  return vectorize_rows(y);
}

}  // namespace

double optimality_residual(const MeasurementMatrix& a, const FusionFrame& f,
                           const BlockCoefficients& c, const Eigen::VectorXd& multiplier,
                           double zero_threshold) {
  c.check_matches(f);
  if (multiplier.size() != a.rows() * f.ambient_dim())
    throw ShapeError("multiplier must have length nM");
  return kkt_residual(c.concatenated(), apply_lifted_transpose(a, f, multiplier), layout_of(f),
                      zero_threshold);
}

SolveReport solve_p1(const MeasurementMatrix& a, const FusionFrame& f, const Eigen::MatrixXd& ymat,
                     const SolverOptions& opts) {
  opts.validate();
  const VectorXd y = vec_of(a, f, ymat);
  const Layout l = layout_of(f);
  const double feas_scale = 1.0 + y.norm();
  const double cert_tol = 10.0 * opts.objective_rel_tol;
  ConstraintSystem sys(a, f, y);
  const VectorXd& cls = sys.least_squares();
  const VectorXd zero_dual = VectorXd::Zero(y.size());

  if ((sys.apply(cls) - y).norm() > opts.feasibility_tol * feas_scale) {
    return finish(sys, f, y, cls, VectorXd(), 0.0, SolveStatus::Infeasible, 0, l);
  }
  if (y.norm() == 0.0) {
    const VectorXd z = VectorXd::Zero(f.total_dim());
    return finish(sys, f, y, z, zero_dual, 0.0, SolveStatus::Converged, 0, l);
  }
  if (sys.injective()) {
    // Single feasible point; any subgradient gives a multiplier.
    const VectorXd c = threshold_blocks(cls, l, opts.hard_threshold);
    VectorXd g = VectorXd::Zero(c.size());
    for (std::size_t j = 0; j < l.dim.size(); ++j) {
      const auto seg = c.segment(l.off[j], l.dim[j]);
      if (seg.norm() > 0.0) g.segment(l.off[j], l.dim[j]) = seg / seg.norm();
    }
    const VectorXd lam = sys.dual(g);
    const double cert = kkt_residual(c, sys.apply_t(lam), l, opts.hard_threshold);
    return finish(sys, f, y, c, lam, cert, SolveStatus::Converged, 0, l);
  }

  double rho = opts.penalty_parameter * static_cast<double>(f.size()) /
               std::max(mixed21(cls, l), 1e-300);
  VectorXd x = cls;
  VectorXd z = cls;
  VectorXd u = VectorXd::Zero(cls.size());
  std::vector<double> history;
  std::vector<std::size_t> last_polished{static_cast<std::size_t>(-1)};
  Candidate best;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    x = sys.project(z - u);
    const VectorXd zprev = z;
    z = block_soft(x + u, 1.0 / rho, l);
    u += x - z;
    const double r = (x - z).norm();
    const double s = rho * (z - zprev).norm();
    history.push_back(mixed21(x, l));

    if (it % 10 == 0 || it == 1) {
      const auto supp = block_support(z, l, opts.hard_threshold);
      if (supp != last_polished) {
        last_polished = supp;
        Candidate cand = polish(a, f, sys, y, supp, rho * u, l, opts, feas_scale);
        if (cand.ok && cand.cert <= cert_tol)
          return finish(sys, f, y, cand.c, cand.lambda, cand.cert, SolveStatus::Converged, it, l);
        if (cand.ok && cand.cert < best.cert) best = std::move(cand);
      }
      // Plain ADMM stopping test.
      if (history.size() > 10 && r <= opts.feasibility_tol * feas_scale) {
        const double fk = history.back();
        const double f0 = history[history.size() - 11];
        if (std::abs(fk - f0) <= opts.objective_rel_tol * std::max(1.0, std::abs(fk))) {
          const VectorXd c = mask_blocks(x, l, supp);
          const VectorXd lam = sys.dual(rho * u);
          const double cert = kkt_residual(c, sys.apply_t(lam), l, opts.hard_threshold);
          if (cert <= cert_tol && (sys.apply(c) - y).norm() <= opts.feasibility_tol * feas_scale)
            return finish(sys, f, y, c, lam, cert, SolveStatus::Converged, it, l);
        }
      }
    }
    if (it % 50 == 0 && r > 0.0 && s > 0.0) {
      const double ratio = r / s;
      if (ratio > 10.0 || ratio < 0.1) {
        const double tau = std::clamp(std::sqrt(ratio), 1e-2, 1e2);
        rho *= tau;
        u /= tau;
      }
    }
  }

  if (best.ok)
    return finish(sys, f, y, best.c, best.lambda, best.cert, SolveStatus::MaxIterations,
                  opts.max_iterations, l);
  const VectorXd c = threshold_blocks(x, l, opts.hard_threshold);
  const VectorXd lam = sys.dual(rho * u);
  return finish(sys, f, y, c, lam, kkt_residual(c, sys.apply_t(lam), l, opts.hard_threshold),
                SolveStatus::MaxIterations, opts.max_iterations, l);
}

SolveReport solve_p1_noisy(const MeasurementMatrix& a, const FusionFrame& f,
                           const Eigen::MatrixXd& ymat, double eta, const SolverOptions& opts) {
  opts.validate();
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ArgumentError("eta must be finite and >= 0");
  if (eta == 0.0) return solve_p1(a, f, ymat, opts);
  const VectorXd y = vec_of(a, f, ymat);
  const Layout l = layout_of(f);
  const double feas_scale = 1.0 + y.norm();
  const double cert_tol = 10.0 * opts.objective_rel_tol;

  const MatrixXd au = lifted_columns(a, f, [&] {
    std::vector<std::size_t> all(f.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return SupportSet(std::move(all));
  }());
  Eigen::BDCSVD<MatrixXd> svd(au, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv_all = svd.singularValues();
  Index r = 0;
  while (r < sv_all.size() && sv_all(r) > 1e-10 * sv_all(0)) ++r;
  const MatrixXd U = svd.matrixU().leftCols(r);
  const MatrixXd V = svd.matrixV().leftCols(r);
  const VectorXd sv = sv_all.head(r);
  const VectorXd yhat = U.transpose() * y;
  const double yperp2 = std::max(0.0, y.squaredNorm() - yhat.squaredNorm());

  auto residual_of = [&](const VectorXd& c) { return (au * c - y).norm(); };
  auto report = [&](const VectorXd& c, const VectorXd& lam, double cert, SolveStatus st,
                    int iters) {
    SolveReport rep;
    rep.status = st;
    rep.iterations = iters;
    rep.coefficients = BlockCoefficients::from_concatenated(f, c);
    rep.final_feasibility_residual = residual_of(c);
    rep.final_objective = mixed21(c, l);
    rep.multiplier = lam;
    rep.certificate_residual = cert;
    return rep;
  };

  if (std::sqrt(yperp2) > eta) {
    return report(V * yhat.cwiseQuotient(sv), VectorXd(), 0.0, SolveStatus::Infeasible, 0);
  }
  if (y.norm() <= eta) {
    return report(VectorXd::Zero(f.total_dim()), VectorXd::Zero(y.size()), 0.0,
                  SolveStatus::Converged, 0);
  }

  // Projection onto {c : ||A_U c - y|| <= eta} in the singular basis.
  const double eta2 = eta * eta;
  auto project = [&](const VectorXd& v) -> VectorXd {
    const VectorXd w = V.transpose() * v;
    const VectorXd e = sv.cwiseProduct(w) - yhat;
    auto res2 = [&](double mu) {
      return (e.array() / (1.0 + mu * sv.array().square())).matrix().squaredNorm() + yperp2;
    };
    if (res2(0.0) <= eta2) return v;
    double lo = 0.0;
    double hi = 1.0 / (sv(0) * sv(0));
    while (res2(hi) > eta2) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) break;
    }
    for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
      const double mid = lo == 0.0 ? 0.5 * hi : std::sqrt(lo * hi);
      (res2(mid) > eta2 ? lo : hi) = mid;
    }
    const double mu = hi;
    const VectorXd wn =
        ((w.array() + mu * sv.array() * yhat.array()) / (1.0 + mu * sv.array().square()))
            .matrix();
    return v - V * w + V * wn;
  };

  auto certify = [&](const VectorXd& c, const VectorXd& w, double& cert) -> VectorXd {
    const VectorXd res = au * c - y;
    const VectorXd atr = au.transpose() * res;
    double t = 0.0;
    if (atr.squaredNorm() > 0.0) t = std::max(0.0, -w.dot(atr) / atr.squaredNorm());
    const VectorXd lam = -t * res;
    cert = kkt_residual(c, au.transpose() * lam, l, opts.hard_threshold);
    return lam;
  };

  const VectorXd c0 = project(VectorXd::Zero(f.total_dim()));
  double rho = opts.penalty_parameter * static_cast<double>(f.size()) /
               std::max(mixed21(c0, l), 1e-300);
  VectorXd x = c0, z = c0, u = VectorXd::Zero(c0.size());
  std::vector<double> history;
  const double feas_limit = eta * (1.0 + 1e-8);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    x = project(z - u);
    const VectorXd zprev = z;
    z = block_soft(x + u, 1.0 / rho, l);
    u += x - z;
    const double rr = (x - z).norm();
    const double ss = rho * (z - zprev).norm();
    history.push_back(mixed21(x, l));

    if (it % 10 == 0 && history.size() > 10 && rr <= opts.feasibility_tol * feas_scale) {
      const double fk = history.back();
      const double f0 = history[history.size() - 11];
      if (std::abs(fk - f0) <= opts.objective_rel_tol * std::max(1.0, std::abs(fk))) {
        VectorXd c = mask_blocks(x, l, block_support(z, l, opts.hard_threshold));
        if (residual_of(c) > feas_limit) c = threshold_blocks(x, l, opts.hard_threshold);
        if (residual_of(c) > feas_limit) c = x;
        double cert = 0.0;
        const VectorXd lam = certify(c, rho * u, cert);
        if (cert <= cert_tol) return report(c, lam, cert, SolveStatus::Converged, it);
      }
    }
    if (it % 50 == 0 && rr > 0.0 && ss > 0.0) {
      const double ratio = rr / ss;
      if (ratio > 10.0 || ratio < 0.1) {
        const double tau = std::clamp(std::sqrt(ratio), 1e-2, 1e2);
        rho *= tau;
        u /= tau;
      }
    }
  }
  VectorXd c = threshold_blocks(x, l, opts.hard_threshold);
  if (residual_of(c) > feas_limit) c = x;
  double cert = 0.0;
  const VectorXd lam = certify(c, rho * u, cert);
  return report(c, lam, cert, SolveStatus::MaxIterations, opts.max_iterations);
}

SolveReport solve_p0_bruteforce(const MeasurementMatrix& a, const FusionFrame& f,
                                const Eigen::MatrixXd& ymat, std::size_t k_max,
                                const SolverOptions& opts) {
  opts.validate();
  const VectorXd y = vec_of(a, f, ymat);
  const std::size_t n = f.size();
  k_max = std::min(k_max, n);
  if (binomial(n, k_max) > 1e6)
    throw ResourceError("support enumeration exceeds budget: C(" + std::to_string(n) + ", " +
                        std::to_string(k_max) + ") > 1e6");
  const Layout l = layout_of(f);
  const double tol = opts.feasibility_tol * (1.0 + y.norm());

  SolveReport rep;
  rep.coefficients = BlockCoefficients::zeros(f);
  for (std::size_t s = 0; s <= k_max; ++s) {
    int evaluated = 0;
    for_each_combination(n, s, [&](const std::vector<std::size_t>& comb) {
      ++evaluated;
      VectorXd c = VectorXd::Zero(f.total_dim());
      double res = y.norm();
      if (!comb.empty()) {
        const MatrixXd b = lifted_columns(a, f, SupportSet(comb));
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(b);
        const VectorXd cs = cod.solve(y);
        res = (b * cs - y).norm();
        Index col = 0;
        for (auto j : comb) {
          c.segment(l.off[j], l.dim[j]) = cs.segment(col, l.dim[j]);
          col += l.dim[j];
        }
      }
      if (res <= tol) {
        if (rep.optimal_supports.empty()) {
          rep.coefficients = BlockCoefficients::from_concatenated(f, c);
          rep.final_feasibility_residual = res;
          rep.final_objective = mixed21(c, l);
        }
        rep.optimal_supports.emplace_back(comb);
      }
      return true;
    });
    rep.iterations += evaluated;
    if (!rep.optimal_supports.empty()) {
      rep.status = SolveStatus::Converged;
      rep.unique = rep.optimal_supports.size() == 1;
      return rep;
    }
  }
  rep.status = SolveStatus::Infeasible;
  rep.unique = false;
  rep.final_feasibility_residual = y.norm();
  return rep;
}

bool recovered(const BlockCoefficients& c_true, const BlockCoefficients& c_hat, double rel_tol) {
  if (c_true.size() != c_hat.size()) throw ShapeError("coefficient sequences differ in length");
  double diff = 0.0, ref = 0.0;
  for (std::size_t j = 0; j < c_true.size(); ++j) {
    if (c_true[j].size() != c_hat[j].size()) throw ShapeError("block sizes differ");
    diff += (c_true[j] - c_hat[j]).squaredNorm();
    ref += c_true[j].squaredNorm();
  }
  return std::sqrt(diff) <= rel_tol * std::max(std::sqrt(ref), 1e-12);
}

}  // namespace ffcs
