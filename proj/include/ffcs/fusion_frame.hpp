#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ffcs/rng.hpp"

namespace ffcs {

class SupportSet;

/// Orthonormal basis U (M x m) of one subspace W of R^M.
class SubspaceBasis {
public:
  /// Validates orthonormality (U^T U = I within 1e-10 entrywise).
  explicit SubspaceBasis(Eigen::MatrixXd basis);

  Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
  Eigen::Index dim() const noexcept { return basis_.cols(); }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }

private:
  Eigen::MatrixXd basis_;
};

struct FrameBounds {
  double lower = 0.0;  // A
  double upper = 0.0;  // B
  bool is_frame = false;
  bool is_tight = false;
};

/// Ordered collection of subspaces of a common R^M, with positive weights.
/// A degenerate collection (lower frame bound 0) is representable; see
/// frame_bounds().is_frame.
class FusionFrame {
public:
  explicit FusionFrame(std::vector<SubspaceBasis> subspaces);
  FusionFrame(std::vector<SubspaceBasis> subspaces, std::vector<double> weights);

  std::size_t size() const noexcept { return subspaces_.size(); }
  Eigen::Index ambient_dim() const noexcept { return ambient_dim_; }
  const SubspaceBasis& operator[](std::size_t j) const { return subspaces_[j]; }
  const std::vector<SubspaceBasis>& subspaces() const noexcept { return subspaces_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  std::vector<Eigen::Index> dims() const;
  Eigen::Index total_dim() const;
  /// Offset of block j inside the concatenated coefficient vector.
  std::vector<Eigen::Index> offsets() const;
  bool unit_weights() const;
  /// Common subspace dimension, or 0 when dimensions differ.
  Eigen::Index common_dim() const;

private:
  std::vector<SubspaceBasis> subspaces_;
  std::vector<double> weights_;
  Eigen::Index ambient_dim_ = 0;
};

/// Orthonormalized M x m Gaussian matrix (QR with the triangular factor's
/// diagonal made positive, so the result depends only on the seed).
SubspaceBasis random_subspace(Eigen::Index ambient_dim, Eigen::Index dim, Seed seed);

/// N random subspaces with the given dimensions; subspace j uses a seed
/// derived from (seed, j).
FusionFrame random_fusion_frame(Eigen::Index ambient_dim, const std::vector<Eigen::Index>& dims,
                                Seed seed);

/// Orthogonal projection P = U U^T.
Eigen::MatrixXd projection_matrix(const SubspaceBasis& s);

FrameBounds frame_bounds(const FusionFrame& f);

/// Largest principal-angle cosine between subspaces i and j, computed as
/// sigma_max(U_i^T U_j).
double subspace_overlap(const FusionFrame& f, std::size_t i, std::size_t j);

/// 1 + max over i in S of sum_{j in S, j != i} overlap(i, j).
double theta_of_support(const FusionFrame& f, const SupportSet& support);

}  // namespace ffcs
