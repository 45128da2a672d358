#include "ffcs/block_signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffcs/errors.hpp"

namespace ffcs {

SupportSet::SupportSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw IndexError("support set contains duplicate indices");
}

bool SupportSet::contains(std::size_t j) const {
  return std::binary_search(indices_.begin(), indices_.end(), j);
}

std::vector<std::size_t> SupportSet::complement(std::size_t n) const {
  std::vector<std::size_t> out;
  out.reserve(n > indices_.size() ? n - indices_.size() : 0);
  for (std::size_t j = 0; j < n; ++j)
    if (!contains(j)) out.push_back(j);
  return out;
}

void SupportSet::check_range(std::size_t n) const {
  if (!indices_.empty() && indices_.back() >= n)
    throw IndexError("support index " + std::to_string(indices_.back()) + " out of range [0, " +
                     std::to_string(n) + ")");
}

BlockCoefficients BlockCoefficients::zeros(const FusionFrame& f) {
  std::vector<Eigen::VectorXd> blocks;
  blocks.reserve(f.size());
  for (const auto& s : f.subspaces()) blocks.push_back(Eigen::VectorXd::Zero(s.dim()));
  return BlockCoefficients(std::move(blocks));
}

BlockCoefficients BlockCoefficients::from_concatenated(const FusionFrame& f,
                                                       const Eigen::VectorXd& v) {
  if (v.size() != f.total_dim())
    throw ShapeError("concatenated coefficient length " + std::to_string(v.size()) +
                     " does not match frame total dimension " + std::to_string(f.total_dim()));
  std::vector<Eigen::VectorXd> blocks;
  blocks.reserve(f.size());
  Eigen::Index off = 0;
  for (const auto& s : f.subspaces()) {
    blocks.push_back(v.segment(off, s.dim()));
    off += s.dim();
  }
  return BlockCoefficients(std::move(blocks));
}

Eigen::VectorXd BlockCoefficients::concatenated() const {
  Eigen::Index total = 0;
  for (const auto& b : blocks_) total += b.size();
  Eigen::VectorXd v(total);
  Eigen::Index off = 0;
  for (const auto& b : blocks_) {
    v.segment(off, b.size()) = b;
    off += b.size();
  }
  return v;
}

bool BlockCoefficients::matches(const FusionFrame& f) const {
  if (blocks_.size() != f.size()) return false;
  for (std::size_t j = 0; j < blocks_.size(); ++j)
    if (blocks_[j].size() != f[j].dim()) return false;
  return true;
}

void BlockCoefficients::check_matches(const FusionFrame& f) const {
  if (!matches(f))
    throw ShapeError("coefficient block lengths do not match the fusion frame dimensions");
}

SupportSet BlockCoefficients::support(double threshold) const {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < blocks_.size(); ++j)
    if (blocks_[j].norm() > threshold) idx.push_back(j);
  return SupportSet(std::move(idx));
}

BlockCoefficients BlockCoefficients::operator-(const BlockCoefficients& other) const {
  if (other.size() != size()) throw ShapeError("block count mismatch");
  std::vector<Eigen::VectorXd> out(size());
  for (std::size_t j = 0; j < size(); ++j) {
    if (blocks_[j].size() != other[j].size()) throw ShapeError("block length mismatch");
    out[j] = blocks_[j] - other[j];
  }
  return BlockCoefficients(std::move(out));
}

BlockCoefficients BlockCoefficients::operator+(const BlockCoefficients& other) const {
  return *this - other * -1.0;
}

BlockCoefficients BlockCoefficients::operator*(double s) const {
  std::vector<Eigen::VectorXd> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = blocks_[j] * s;
  return BlockCoefficients(std::move(out));
}

Eigen::MatrixXd synthesize(const FusionFrame& f, const BlockCoefficients& c) {
  c.check_matches(f);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(f.size()), f.ambient_dim());
  for (std::size_t j = 0; j < f.size(); ++j)
    x.row(static_cast<Eigen::Index>(j)) = (f[j].basis() * c[j]).transpose();
  return x;
}

double mixed_norm(const BlockCoefficients& c, int p) {
  return mixed_norm(c, p, std::vector<double>(c.size(), 1.0));
}

double mixed_norm(const BlockCoefficients& c, int p, const std::vector<double>& weights) {
  if (weights.size() != c.size()) throw ShapeError("weight count does not match block count");
  switch (p) {
    case 0: {
      double count = 0.0;
      for (const auto& b : c.blocks())
        if (b.norm() > kZeroBlockThreshold) count += 1.0;
      return count;
    }
    case 1: {
      double s = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j) s += weights[j] * c[j].norm();
      return s;
    }
    case 2: {
      double s = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j) {
        const double v = weights[j] * c[j].norm();
        s += v * v;
      }
      return std::sqrt(s);
    }
    default:
      throw ArgumentError("mixed_norm supports p in {0, 1, 2}, got " + std::to_string(p));
  }
}

Eigen::MatrixXd sgn_rows(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const double n = x.row(j).norm();
    if (n != 0.0) out.row(j) = x.row(j) / n;
  }
  return out;
}

Eigen::VectorXd vectorize_rows(const Eigen::MatrixXd& x) {
  Eigen::VectorXd v(x.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) v.segment(i * x.cols(), x.cols()) = x.row(i).transpose();
  return v;
}

Eigen::MatrixXd unvectorize_rows(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw ShapeError("vector length does not match rows * cols");
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) x.row(i) = v.segment(i * cols, cols).transpose();
  return x;
}

BlockCoefficients random_gaussian_signal(const FusionFrame& f, const SupportSet& support,
                                         Seed seed) {
  support.check_range(f.size());
  auto c = BlockCoefficients::zeros(f);
  for (auto j : support.indices()) {
    RandomStream rng(derive_seed(seed, {j}));
    c[j] = rng.normal_vector(f[j].dim());
  }
  return c;
}

SupportSet random_support(std::size_t n, std::size_t k, Seed seed) {
  if (k > n) throw ArgumentError("support size exceeds number of blocks");
  // partial Fisher-Yates
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  RandomStream rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t r = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[r]);
  }
  pool.resize(k);
  return SupportSet(std::move(pool));
}

}  // namespace ffcs
