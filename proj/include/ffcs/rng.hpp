#pragma once

#include <cstdint>
#include <initializer_list>

#include <Eigen/Dense>

namespace ffcs {

using Seed = std::uint64_t;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a parent and a path of tags.
/// Used to give every (cell, trial, role) its own stream.
Seed derive_seed(Seed parent, std::initializer_list<std::uint64_t> path) noexcept;

/// Counter-based random stream: draw i is mix64(key + i * golden), so a
/// stream is fully determined by its key and the number of draws taken.
class RandomStream {
public:
  explicit RandomStream(Seed key) noexcept : key_(mix64(key)) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform in (0, 1], 53 bits.
  double uniform() noexcept;
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ffcs
