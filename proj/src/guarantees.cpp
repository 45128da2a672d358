#include "ffcs/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>

#include "ffcs/errors.hpp"
#include "ffcs/linalg.hpp"

namespace ffcs {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kEnumerationBudget = 1e6;
constexpr double kTieTol = 1e-12;

void require_unit_weights(const FusionFrame& f) {
  if (!f.unit_weights())
    throw ArgumentError("guarantee computations require a unit-weight fusion frame");
}

struct ChunkBest {
  std::size_t begin = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, std::vector<std::size_t>>> ties;
  std::size_t count = 0;
};

struct Enumerated {
  double worst = 0.0;
  std::vector<SupportSet> extremal;
  std::size_t count = 0;
};

// Maximum of `value` over all k-subsets of {0..n-1}, evaluated in parallel
// chunks and reduced in lexicographic order.
Enumerated enumerate_max(std::size_t n, std::size_t k, unsigned threads,
                         const std::function<double(const std::vector<std::size_t>&)>& value) {
  if (k > n) throw ArgumentError("support size exceeds the number of blocks");
  const double total_d = binomial(n, k);
  if (total_d > kEnumerationBudget)
    throw ResourceError("support enumeration exceeds budget: C(" + std::to_string(n) + ", " +
                        std::to_string(k) + ") > 1e6");
  const auto total = static_cast<std::size_t>(total_d);
  std::vector<ChunkBest> chunks;
  std::mutex mu;
  parallel_chunks(total, threads, [&](std::size_t b, std::size_t e) {
    ChunkBest cb;
    cb.begin = b;
    std::vector<std::size_t> comb = combination_at(n, k, b);
    for (std::size_t i = b; i < e; ++i) {
      const double v = value(comb);
      ++cb.count;
      if (v > cb.worst + kTieTol) {
        cb.worst = v;
        cb.ties.clear();
      }
      if (v >= cb.worst - kTieTol) {
        cb.worst = std::max(cb.worst, v);
        cb.ties.emplace_back(v, comb);
      }
      if (i + 1 < e) next_combination(comb, n);
    }
    std::lock_guard<std::mutex> lock(mu);
    chunks.push_back(std::move(cb));
  });
  std::sort(chunks.begin(), chunks.end(),
            [](const ChunkBest& x, const ChunkBest& y) { return x.begin < y.begin; });
  Enumerated out;
  out.worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : chunks) {
    out.worst = std::max(out.worst, c.worst);
    out.count += c.count;
  }
  for (const auto& c : chunks)
    for (const auto& [v, comb] : c.ties)
      if (v >= out.worst - kTieTol) out.extremal.emplace_back(comb);
  return out;
}

double deviation_of(const MatrixXd& gram) {
  const auto [hi, lo] = extreme_eigenvalues(gram);
  return std::max({hi - 1.0, 1.0 - lo, 0.0});
}

}  // namespace

std::size_t coherence_recovery_bound(double mu_f) {
  if (!(mu_f >= 0.0 && mu_f <= 1.0)) throw ArgumentError("mu_f must lie in [0, 1]");
  if (mu_f == 0.0) return kUnboundedSparsity;
  const double x = 0.5 * (1.0 + 1.0 / mu_f);
  return static_cast<std::size_t>(std::ceil(x)) - 1;
}

FripResult frip_constant(const MeasurementMatrix& a, const FusionFrame& f, std::size_t k,
                         unsigned threads) {
  check_compatible(a, f);
  require_unit_weights(f);
  const MatrixXd g = lifted_gram(a, f);
  const auto off = f.offsets();
  const auto dim = f.dims();
  const auto res = enumerate_max(f.size(), k, threads, [&](const std::vector<std::size_t>& s) {
    if (s.empty()) return 0.0;
    std::vector<Index> idx;
    for (auto j : s)
      for (Index t = 0; t < dim[j]; ++t) idx.push_back(off[j] + t);
    const auto p = static_cast<Index>(idx.size());
    MatrixXd sub(p, p);
    for (Index r = 0; r < p; ++r)
      for (Index c = 0; c < p; ++c) sub(r, c) = g(idx[r], idx[c]);
    return deviation_of(sub);
  });
  FripResult out;
  out.k = k;
  out.delta_k = std::max(res.worst, 0.0);
  out.extremal_supports = res.extremal;
  out.supports_enumerated = res.count;
  return out;
}

FripFlags frip_recovery_checks(double delta_2k) {
  if (!(delta_2k >= 0.0)) throw ArgumentError("delta_2k must be non-negative");
  return {delta_2k < 1.0 / 3.0, delta_2k < std::sqrt(2.0) - 1.0};
}

double classical_rip_constant(const MeasurementMatrix& a, std::size_t k, unsigned threads) {
  const MatrixXd g = a.entries().transpose() * a.entries();
  const auto res = enumerate_max(static_cast<std::size_t>(a.cols()), k, threads,
                                 [&](const std::vector<std::size_t>& s) {
                                   if (s.empty()) return 0.0;
                                   const auto p = static_cast<Index>(s.size());
                                   MatrixXd sub(p, p);
                                   for (Index r = 0; r < p; ++r)
                                     for (Index c = 0; c < p; ++c)
                                       sub(r, c) = g(static_cast<Index>(s[r]),
                                                     static_cast<Index>(s[c]));
                                   return deviation_of(sub);
                                 });
  return std::max(res.worst, 0.0);
}

bool rip_dominates_frip(const MeasurementMatrix& a, const FusionFrame& f, std::size_t k) {
  return frip_constant(a, f, k).delta_k <= classical_rip_constant(a, k) + 1e-10;
}

CertificateResult dual_certificate_check(const MeasurementMatrix& a, const FusionFrame& f,
                                         const BlockCoefficients& c) {
  check_compatible(a, f);
  require_unit_weights(f);
  c.check_matches(f);
  const SupportSet s = c.support();
  const auto outside = s.complement(f.size());
  CertificateResult out;
  out.worst_j = f.size();
  if (s.empty() || outside.empty()) {
    out.passed = true;
    out.margin = 1.0;
    return out;
  }
  const MatrixXd as = a.columns(s);
  Eigen::JacobiSVD<MatrixXd> svd(as, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * std::max(1.0, sv(0)))
    throw SingularityError("A_S is rank deficient; the certificate needs full column rank");
  const MatrixXd pinv =
      svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  const MatrixXd ucs = synthesize(f, c);
  MatrixXd sgn_s(static_cast<Index>(s.size()), f.ambient_dim());
  for (std::size_t r = 0; r < s.size(); ++r) sgn_s.row(static_cast<Index>(r)) = ucs.row(static_cast<Index>(s.indices()[r]));
  sgn_s = sgn_rows(sgn_s);
  double worst = -1.0;
  for (auto j : outside) {
    const VectorXd coeff = pinv * a.column(j);
    const double v = (sgn_s.transpose() * coeff).norm();
    if (v > worst) {
      worst = v;
      out.worst_j = j;
    }
  }
  out.margin = 1.0 - worst;
  out.passed = out.margin > 0.0;
  return out;
}

double nsp_ratio(const FusionFrame& f, const VectorXd& h, std::size_t k) {
  if (h.size() != f.total_dim()) throw ShapeError("null vector length must equal sum of dims");
  const auto off = f.offsets();
  const auto dim = f.dims();
  std::vector<double> norms(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) norms[j] = h.segment(off[j], dim[j]).norm();
  const double total = std::accumulate(norms.begin(), norms.end(), 0.0);
  if (total == 0.0) return 0.0;
  k = std::min(k, f.size());
  double best = 0.0;
  if (binomial(f.size(), k) <= 1e5) {
    for_each_combination(f.size(), k, [&](const std::vector<std::size_t>& s) {
      double sum = 0.0;
      for (auto j : s) sum += norms[j];
      best = std::max(best, sum);
      return true;
    });
  } else {
    std::sort(norms.begin(), norms.end(), std::greater<>());
    best = std::accumulate(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  }
  return best / total;
}

NspResult nsp_sampled_check(const MeasurementMatrix& a, const FusionFrame& f, std::size_t k,
                            std::size_t trials, Seed seed) {
  check_compatible(a, f);
  require_unit_weights(f);
  std::vector<std::size_t> all(f.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const MatrixXd au = lifted_columns(a, f, SupportSet(all));
  const MatrixXd basis = null_space_basis(au);
  NspResult out;
  out.null_dim = basis.cols();
  if (basis.cols() == 0) return out;
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream rs(derive_seed(seed, {t}));
    VectorXd h = basis * rs.normal_vector(basis.cols());
    h.normalize();
    out.worst_ratio = std::max(out.worst_ratio, nsp_ratio(f, h, k));
  }
  out.violation_found = out.worst_ratio >= 0.5;
  return out;
}

Theorem4Bound theorem4_failure_bound(double alpha, double theta, double m, std::size_t N,
                                     std::size_t k) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ArgumentError("alpha must be >= 0");
  if (!(theta >= 1.0) || !std::isfinite(theta)) throw ArgumentError("theta must be >= 1");
  if (!(m >= 1.0) || !std::isfinite(m)) throw ArgumentError("m must be >= 1");
  if (k >= N) throw ArgumentError("k must be smaller than N");
  Theorem4Bound out;
  out.alpha = alpha;
  out.theta = theta;
  out.m = m;
  out.N = N;
  out.k = k;
  if (alpha >= 1.0) {
    out.degenerate = true;
    return out;
  }
  const double nk = static_cast<double>(N - k);
  const double kd = static_cast<double>(k);
  auto r1 = [&](double d) {
    if (alpha == 0.0) return std::numeric_limits<double>::infinity();
    const double g = std::sqrt(1.0 - d) - alpha;
    return g * g / (2.0 * alpha * alpha * theta);
  };
  auto additive = [&](double d) {
    return nk * std::exp(-r1(d) * m) + kd * std::exp(-d * d * m / 4.0);
  };
  const double width = 1.0 - alpha * alpha;
  const auto G = static_cast<double>(kTheorem4GridPoints);
  double best = std::numeric_limits<double>::infinity();
  double best_rate = 0.0;
  double prev = 0.0;
  for (std::size_t i = 1; i <= kTheorem4GridPoints; ++i) {
    const double d = static_cast<double>(i) * width / (G + 1.0);
    const double v = additive(d);
    if (v < best) {
      best = v;
      out.delta_star = d;
    }
    best_rate = std::max(best_rate, std::min(r1(d), d * d / 4.0));
    if (i > 1) out.grid_resolution_error = std::max(out.grid_resolution_error, std::abs(v - prev));
    prev = v;
  }
  out.additive_raw = best;
  out.bound = std::clamp(best, 0.0, 1.0);
  out.rate = best_rate;
  out.single_exponential_raw = static_cast<double>(N) * std::exp(-best_rate * m);
  out.single_exponential = std::clamp(out.single_exponential_raw, 0.0, 1.0);
  return out;
}

void require_equal_dims_unit_weights(const FusionFrame& f) {
  require_unit_weights(f);
  if (f.common_dim() == 0) throw ArgumentError("subspaces must all have the same dimension");
}

namespace {

MatrixXd support_operator(const FusionFrame& f, const SupportSet& s, const VectorXd& b) {
  require_equal_dims_unit_weights(f);
  s.check_range(f.size());
  if (s.empty()) throw ArgumentError("support must be nonempty");
  if (b.size() != static_cast<Index>(s.size())) throw ShapeError("b must have length |S|");
  const Index M = f.ambient_dim();
  const Index m = f.common_dim();
  MatrixXd ops(M, static_cast<Index>(s.size()) * m);
  for (std::size_t l = 0; l < s.size(); ++l)
    ops.middleCols(static_cast<Index>(l) * m, m) = b(static_cast<Index>(l)) * f[s.indices()[l]].basis();
  return ops;
}

}  // namespace

double lipschitz_constant(const FusionFrame& f, const SupportSet& s, const VectorXd& b) {
  // The zero blocks of the M x (N m) operator do not change its singular values.
  const MatrixXd ops = support_operator(f, s, b);
  return Eigen::JacobiSVD<MatrixXd>(ops).singularValues()(0);
}

LemmaReport verify_probabilistic_lemmas(const FusionFrame& f, const SupportSet& s,
                                        const VectorXd& b, std::size_t samples, Seed seed,
                                        const LemmaOptions& opts) {
  const MatrixXd ops = support_operator(f, s, b);
  if (samples < 2) throw ArgumentError("need at least two samples");
  if (!(opts.lipschitz_bound_scale > 0.0)) throw ArgumentError("bound scale must be positive");
  const Index m = f.common_dim();

  LemmaReport rep;
  rep.lipschitz = Eigen::JacobiSVD<MatrixXd>(ops).singularValues()(0);
  rep.theta = theta_of_support(f, s);
  const double unscaled = b.cwiseAbs().maxCoeff() * std::sqrt(rep.theta);
  rep.lipschitz_bound = opts.lipschitz_bound_scale * unscaled;
  rep.lemma4_passed = rep.lipschitz <= rep.lipschitz_bound + 1e-10 * std::max(1.0, unscaled);
  rep.lemma4_tight = std::abs(rep.lipschitz - unscaled) <= 1e-10 * std::max(1.0, unscaled);

  std::vector<double> vals(samples);
  parallel_chunks(samples, opts.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      RandomStream rs(derive_seed(seed, {i}));
      vals[i] = (ops * rs.normal_vector(ops.cols())).norm();
    }
  });
  const double n = static_cast<double>(samples);
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= (n - 1.0);
  rep.mc_mean = mean;
  rep.mc_stderr = std::sqrt(var / n);
  rep.mean_bound = std::sqrt(static_cast<double>(m)) * b.norm();
  rep.lemma3_passed = rep.mc_mean <= rep.mean_bound + 3.0 * rep.mc_stderr;

  const double l_used = opts.lipschitz_bound_scale * rep.lipschitz;
  bool tails_ok = true;
  for (int mult = 1; mult <= 3; ++mult) {
    TailCheck t;
    t.u = mult * rep.lipschitz;
    std::size_t hits = 0;
    for (double v : vals)
      if (std::abs(v - mean) >= t.u) ++hits;
    t.empirical = static_cast<double>(hits) / n;
    t.std_error = std::sqrt(t.empirical * (1.0 - t.empirical) / n);
    t.bound = l_used > 0.0 ? 2.0 * std::exp(-t.u * t.u / (2.0 * l_used * l_used)) : 0.0;
    t.passed = t.empirical <= t.bound + 3.0 * t.std_error;
    tails_ok = tails_ok && t.passed;
    rep.tails.push_back(t);
  }
  rep.all_passed = rep.lemma4_passed && rep.lemma3_passed && tails_ok;
  return rep;
}

}  // namespace ffcs
