#include "ffcs/fusion_frame.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffcs/block_signal.hpp"
#include "ffcs/errors.hpp"
#include "ffcs/linalg.hpp"

namespace ffcs {

SubspaceBasis::SubspaceBasis(Eigen::MatrixXd basis) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.rows() < 1 || basis_.cols() > basis_.rows())
    throw DimensionError("subspace basis must satisfy 1 <= m <= M, got M=" +
                         std::to_string(basis_.rows()) + " m=" + std::to_string(basis_.cols()));
  const Eigen::MatrixXd gram = basis_.transpose() * basis_;
  const double dev =
      (gram - Eigen::MatrixXd::Identity(basis_.cols(), basis_.cols())).cwiseAbs().maxCoeff();
  if (!(dev <= 1e-10))
    throw ArgumentError("subspace basis columns are not orthonormal (max deviation " +
                        std::to_string(dev) + ")");
}

FusionFrame::FusionFrame(std::vector<SubspaceBasis> subspaces)
    : FusionFrame(std::move(subspaces), {}) {}

FusionFrame::FusionFrame(std::vector<SubspaceBasis> subspaces, std::vector<double> weights)
    : subspaces_(std::move(subspaces)), weights_(std::move(weights)) {
  if (subspaces_.empty()) throw DimensionError("fusion frame needs at least one subspace");
  ambient_dim_ = subspaces_.front().ambient_dim();
  for (const auto& s : subspaces_)
    if (s.ambient_dim() != ambient_dim_)
      throw DimensionError("all subspaces of a fusion frame must share the ambient dimension");
  if (weights_.empty()) weights_.assign(subspaces_.size(), 1.0);
  if (weights_.size() != subspaces_.size())
    throw ShapeError("fusion frame has " + std::to_string(subspaces_.size()) + " subspaces but " +
                     std::to_string(weights_.size()) + " weights");
  for (double w : weights_)
    if (!(w > 0.0) || !std::isfinite(w))
      throw ArgumentError("fusion frame weights must be strictly positive");
}

std::vector<Eigen::Index> FusionFrame::dims() const {
  std::vector<Eigen::Index> d;
  d.reserve(subspaces_.size());
  for (const auto& s : subspaces_) d.push_back(s.dim());
  return d;
}

Eigen::Index FusionFrame::total_dim() const {
  Eigen::Index t = 0;
  for (const auto& s : subspaces_) t += s.dim();
  return t;
}

std::vector<Eigen::Index> FusionFrame::offsets() const {
  std::vector<Eigen::Index> off(subspaces_.size());
  Eigen::Index t = 0;
  for (std::size_t j = 0; j < subspaces_.size(); ++j) {
    off[j] = t;
    t += subspaces_[j].dim();
  }
  return off;
}

bool FusionFrame::unit_weights() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
}

Eigen::Index FusionFrame::common_dim() const {
  const Eigen::Index m = subspaces_.front().dim();
  for (const auto& s : subspaces_)
    if (s.dim() != m) return 0;
  return m;
}

SubspaceBasis random_subspace(Eigen::Index ambient_dim, Eigen::Index dim, Seed seed) {
  if (dim < 1 || ambient_dim < 1 || dim > ambient_dim)
    throw DimensionError("random_subspace requires 1 <= m <= M, got M=" +
                         std::to_string(ambient_dim) + " m=" + std::to_string(dim));
  RandomStream rng(seed);
  const Eigen::MatrixXd g = rng.normal_matrix(ambient_dim, dim);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ambient_dim, dim);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index i = 0; i < dim; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return SubspaceBasis(std::move(q));
}

FusionFrame random_fusion_frame(Eigen::Index ambient_dim, const std::vector<Eigen::Index>& dims,
                                Seed seed) {
  std::vector<SubspaceBasis> subs;
  subs.reserve(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j)
    subs.push_back(random_subspace(ambient_dim, dims[j], derive_seed(seed, {j})));
  return FusionFrame(std::move(subs));
}

Eigen::MatrixXd projection_matrix(const SubspaceBasis& s) {
  return s.basis() * s.basis().transpose();
}

FrameBounds frame_bounds(const FusionFrame& f) {
  const Eigen::Index M = f.ambient_dim();
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(M, M);
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double w2 = f.weights()[j] * f.weights()[j];
    op.noalias() += w2 * projection_matrix(f[j]);
  }
  const auto [hi, lo] = extreme_eigenvalues(op);
  FrameBounds b;
  b.lower = std::max(lo, 0.0);
  b.upper = hi;
  b.is_frame = b.lower > 1e-10;
  b.is_tight = std::abs(b.upper - b.lower) <= 1e-10;
  return b;
}

double subspace_overlap(const FusionFrame& f, std::size_t i, std::size_t j) {
  if (i >= f.size() || j >= f.size())
    throw IndexError("subspace index out of range");
  if (i == j) throw IndexError("subspace_overlap needs two distinct indices");
  const Eigen::MatrixXd cross = f[i].basis().transpose() * f[j].basis();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
  return std::min(1.0, svd.singularValues()(0));
}

double theta_of_support(const FusionFrame& f, const SupportSet& support) {
  if (support.empty()) throw ArgumentError("theta_of_support needs a nonempty support");
  const auto& idx = support.indices();
  for (auto j : idx)
    if (j >= f.size()) throw IndexError("support index out of range");
  double worst = 0.0;
  for (auto i : idx) {
    double row = 0.0;
    for (auto j : idx)
      if (j != i) row += subspace_overlap(f, i, j);
    worst = std::max(worst, row);
  }
  return 1.0 + worst;
}

}  // namespace ffcs
