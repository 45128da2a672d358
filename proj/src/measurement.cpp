#include "ffcs/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffcs/errors.hpp"
#include "ffcs/linalg.hpp"

namespace ffcs {

MeasurementMatrix::MeasurementMatrix(Eigen::MatrixXd entries, ColumnPolicy policy)
    : a_(std::move(entries)) {
  if (a_.rows() < 1 || a_.cols() < 1) throw ArgumentError("measurement matrix must be nonempty");
  for (Eigen::Index j = 0; j < a_.cols(); ++j) {
    const double norm = a_.col(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw ArgumentError("measurement matrix column " + std::to_string(j) +
                          " has zero or non-finite norm");
    if (std::abs(norm - 1.0) > 1e-10) {
      if (policy == ColumnPolicy::Strict)
        throw ArgumentError("measurement matrix column " + std::to_string(j) +
                            " is not unit norm (norm " + std::to_string(norm) + ")");
      renormalized_ = true;
    }
    if (policy == ColumnPolicy::Renormalize) a_.col(j) /= norm;
  }
}

Eigen::MatrixXd MeasurementMatrix::columns(const SupportSet& s) const {
  s.check_range(static_cast<std::size_t>(cols()));
  Eigen::MatrixXd out(rows(), static_cast<Eigen::Index>(s.size()));
  Eigen::Index c = 0;
  for (auto j : s.indices()) out.col(c++) = a_.col(static_cast<Eigen::Index>(j));
  return out;
}

void check_compatible(const MeasurementMatrix& a, const FusionFrame& f) {
  if (static_cast<std::size_t>(a.cols()) != f.size())
    throw ShapeError("measurement matrix has " + std::to_string(a.cols()) +
                     " columns but the fusion frame has " + std::to_string(f.size()) +
                     " subspaces");
}

MeasurementMatrix random_measurement_matrix(Eigen::Index n, Eigen::Index N, Seed seed) {
  if (n < 1 || N < 1) throw ArgumentError("measurement matrix dimensions must be positive");
  RandomStream rng(seed);
  Eigen::MatrixXd g = rng.normal_matrix(n, N);
  for (Eigen::Index j = 0; j < N; ++j) g.col(j).normalize();
  return MeasurementMatrix(std::move(g), ColumnPolicy::Renormalize);
}

MeasurementMatrix identity_hadamard_matrix(Eigen::Index n) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw ArgumentError("identity|Hadamard design needs n to be a power of two");
  Eigen::MatrixXd h = Eigen::MatrixXd::Ones(1, 1);
  while (h.rows() < n) {
    const Eigen::Index r = h.rows();
    Eigen::MatrixXd next(2 * r, 2 * r);
    next << h, h, h, -h;
    h = std::move(next);
  }
  Eigen::MatrixXd a(n, 2 * n);
  a << Eigen::MatrixXd::Identity(n, n), h / std::sqrt(static_cast<double>(n));
  return MeasurementMatrix(std::move(a), ColumnPolicy::Renormalize);
}

Eigen::MatrixXd measure(const MeasurementMatrix& a, const FusionFrame& f,
                        const BlockCoefficients& c) {
  check_compatible(a, f);
  return a.entries() * synthesize(f, c);
}

BlockOperator build_block_operator(const MeasurementMatrix& a, const FusionFrame& f,
                                   BlockOperatorKind kind) {
  check_compatible(a, f);
  BlockOperator op;
  op.kind = kind;
  op.n = a.rows();
  op.N = a.cols();
  op.M = f.ambient_dim();
  op.dims = f.dims();
  const Eigen::Index M = op.M;
  const Eigen::Index cols = kind == BlockOperatorKind::Projection ? op.N * M : f.total_dim();
  op.matrix = Eigen::MatrixXd::Zero(op.n * M, cols);
  const auto offsets = f.offsets();
  for (Eigen::Index j = 0; j < op.N; ++j) {
    const auto& u = f[static_cast<std::size_t>(j)].basis();
    const Eigen::MatrixXd block = kind == BlockOperatorKind::Projection
                                      ? Eigen::MatrixXd(u * u.transpose())
                                      : u;
    const Eigen::Index col0 =
        kind == BlockOperatorKind::Projection ? j * M : offsets[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < op.n; ++i)
      op.matrix.block(i * M, col0, M, block.cols()) = a.entries()(i, j) * block;
  }
  return op;
}

Eigen::MatrixXd lifted_columns(const MeasurementMatrix& a, const FusionFrame& f,
                               const SupportSet& s) {
  check_compatible(a, f);
  s.check_range(f.size());
  const Eigen::Index M = f.ambient_dim();
  Eigen::Index width = 0;
  for (auto j : s.indices()) width += f[j].dim();
  Eigen::MatrixXd out(a.rows() * M, width);
  Eigen::Index col = 0;
  for (auto j : s.indices()) {
    const auto& u = f[j].basis();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * M, col, M, u.cols()) = a.entries()(i, static_cast<Eigen::Index>(j)) * u;
    col += u.cols();
  }
  return out;
}

Eigen::MatrixXd lifted_gram(const MeasurementMatrix& a, const FusionFrame& f) {
  check_compatible(a, f);
  const Eigen::MatrixXd ga = a.entries().transpose() * a.entries();
  const auto off = f.offsets();
  const Eigen::Index total = f.total_dim();
  Eigen::MatrixXd w(f.ambient_dim(), total);
  for (std::size_t j = 0; j < f.size(); ++j) w.middleCols(off[j], f[j].dim()) = f[j].basis();
  Eigen::MatrixXd g = w.transpose() * w;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    g.block(off[j], off[j], f[j].dim(), f[j].dim()) =
        ga(jj, jj) * Eigen::MatrixXd::Identity(f[j].dim(), f[j].dim());
    for (std::size_t k = j + 1; k < f.size(); ++k) {
      const double s = ga(jj, static_cast<Eigen::Index>(k));
      g.block(off[j], off[k], f[j].dim(), f[k].dim()) *= s;
      g.block(off[k], off[j], f[k].dim(), f[j].dim()) *= s;
    }
  }
  return g;
}

Eigen::VectorXd apply_lifted(const MeasurementMatrix& a, const FusionFrame& f,
                             const Eigen::VectorXd& c) {
  return vectorize_rows(measure(a, f, BlockCoefficients::from_concatenated(f, c)));
}

Eigen::VectorXd apply_lifted_transpose(const MeasurementMatrix& a, const FusionFrame& f,
                                       const Eigen::VectorXd& y) {
  check_compatible(a, f);
  const Eigen::MatrixXd ymat = unvectorize_rows(y, a.rows(), f.ambient_dim());
  // column j of (Y^T A) is Y^T a_j
  const Eigen::MatrixXd yta = ymat.transpose() * a.entries();
  Eigen::VectorXd out(f.total_dim());
  Eigen::Index off = 0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    out.segment(off, f[j].dim()) =
        f[j].basis().transpose() * yta.col(static_cast<Eigen::Index>(j));
    off += f[j].dim();
  }
  return out;
}

double coherence(const MeasurementMatrix& a) {
  if (a.cols() < 2) throw ArgumentError("coherence needs at least two columns");
  const Eigen::MatrixXd g = a.entries().transpose() * a.entries();
  double mu = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) mu = std::max(mu, std::abs(g(i, j)));
  return std::min(mu, 1.0);
}

double fusion_coherence(const MeasurementMatrix& a, const FusionFrame& f) {
  check_compatible(a, f);
  if (a.cols() < 2) throw ArgumentError("fusion coherence needs at least two columns");
  const Eigen::MatrixXd g = a.entries().transpose() * a.entries();
  double mu = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    for (std::size_t j = 0; j < k; ++j) {
      const double ip = std::abs(g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
      if (ip == 0.0 || ip * 1.0 <= mu) continue;
      mu = std::max(mu, ip * subspace_overlap(f, j, k));
    }
  return std::min(mu, 1.0);
}

double alpha_of_support(const MeasurementMatrix& a, const SupportSet& s) {
  s.check_range(static_cast<std::size_t>(a.cols()));
  const auto outside = s.complement(static_cast<std::size_t>(a.cols()));
  if (s.empty() || outside.empty()) return 0.0;
  const Eigen::MatrixXd as = a.columns(s);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(as);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-10))
    throw SingularityError("A_S is rank deficient (sigma_min = " +
                           std::to_string(sv(sv.size() - 1)) + ")");
  const Eigen::MatrixXd pinv = pseudo_inverse(as);
  double alpha = 0.0;
  for (auto j : outside)
    alpha = std::max(alpha, (pinv * a.column(j)).norm());
  return alpha;
}

}  // namespace ffcs
