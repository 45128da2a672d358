#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace ffcs {

/// Moore-Penrose pseudo-inverse; singular values below rel_tol * sigma_max
/// are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

/// Orthonormal basis (columns) of the null space of `a`: right singular
/// vectors whose singular value is <= rel_tol * sigma_max, plus any beyond
/// the row count.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

/// Largest and smallest eigenvalue of a symmetric matrix.
std::pair<double, double> extreme_eigenvalues(const Eigen::MatrixXd& sym);

/// Binomial coefficient as a double (saturates rather than overflowing).
double binomial(std::size_t n, std::size_t k);

/// Enumerates all k-subsets of {0..n-1} in lexicographic order. The callback
/// returns false to stop early.
void for_each_combination(std::size_t n, std::size_t k,
                          const std::function<bool(const std::vector<std::size_t>&)>& fn);

/// The `rank`-th k-subset of {0..n-1} in lexicographic order.
std::vector<std::size_t> combination_at(std::size_t n, std::size_t k, std::size_t rank);

/// Advances `comb` to the next k-subset in lexicographic order; false at the end.
bool next_combination(std::vector<std::size_t>& comb, std::size_t n);

/// Runs fn(begin, end) over `threads` contiguous chunks of [0, count).
/// Chunk boundaries depend only on (count, threads); callers write results
/// into per-index slots and reduce in index order, so output never depends on
/// scheduling.
void parallel_chunks(std::size_t count, unsigned threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace ffcs
