#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "ffcs/fusion_frame.hpp"
#include "ffcs/rng.hpp"

namespace ffcs {

/// Blocks with Euclidean norm at or below this count as zero.
inline constexpr double kZeroBlockThreshold = 1e-9;

/// Strictly increasing list of block indices (0-based).
class SupportSet {
public:
  SupportSet() = default;
  /// Sorts; throws IndexError on duplicates.
  explicit SupportSet(std::vector<std::size_t> indices);
  SupportSet(std::initializer_list<std::size_t> indices)
      : SupportSet(std::vector<std::size_t>(indices)) {}

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(std::size_t j) const;
  /// Indices of {0..n-1} not in the set.
  std::vector<std::size_t> complement(std::size_t n) const;
  /// Throws IndexError if any index is >= n.
  void check_range(std::size_t n) const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

private:
  std::vector<std::size_t> indices_;
};

/// Coefficient sequence c = (c_j), c_j in R^{m_j}.
class BlockCoefficients {
public:
  BlockCoefficients() = default;
  explicit BlockCoefficients(std::vector<Eigen::VectorXd> blocks) : blocks_(std::move(blocks)) {}

  static BlockCoefficients zeros(const FusionFrame& f);
  /// Splits a concatenated vector according to the frame's block dimensions.
  static BlockCoefficients from_concatenated(const FusionFrame& f, const Eigen::VectorXd& v);

  std::size_t size() const noexcept { return blocks_.size(); }
  const Eigen::VectorXd& operator[](std::size_t j) const { return blocks_[j]; }
  Eigen::VectorXd& operator[](std::size_t j) { return blocks_[j]; }
  const std::vector<Eigen::VectorXd>& blocks() const noexcept { return blocks_; }

  Eigen::VectorXd concatenated() const;
  bool matches(const FusionFrame& f) const;
  /// Throws ShapeError unless block lengths equal the frame's dimensions.
  void check_matches(const FusionFrame& f) const;
  /// Blocks with norm > threshold.
  SupportSet support(double threshold = kZeroBlockThreshold) const;

  BlockCoefficients operator-(const BlockCoefficients& other) const;
  BlockCoefficients operator+(const BlockCoefficients& other) const;
  BlockCoefficients operator*(double s) const;

private:
  std::vector<Eigen::VectorXd> blocks_;
};

/// U(c): the N x M matrix whose row j is (U_j c_j)^T.
Eigen::MatrixXd synthesize(const FusionFrame& f, const BlockCoefficients& c);

/// Mixed l_{2,p} norm for p in {0, 1, 2}. Weights default to 1 and are
/// ignored for p = 0 (block count).
double mixed_norm(const BlockCoefficients& c, int p);
double mixed_norm(const BlockCoefficients& c, int p, const std::vector<double>& weights);

/// Row-wise sign: each nonzero row scaled to unit norm, zero rows kept zero.
Eigen::MatrixXd sgn_rows(const Eigen::MatrixXd& x);

/// Concatenation of the rows of x.
Eigen::VectorXd vectorize_rows(const Eigen::MatrixXd& x);
/// Inverse of vectorize_rows.
Eigen::MatrixXd unvectorize_rows(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols);

/// Blocks on the support filled with independent standard normals, zero
/// elsewhere. Block j draws from a stream derived from (seed, j).
BlockCoefficients random_gaussian_signal(const FusionFrame& f, const SupportSet& support, Seed seed);

/// Uniformly random k-subset of {0..n-1}.
SupportSet random_support(std::size_t n, std::size_t k, Seed seed);

}  // namespace ffcs
