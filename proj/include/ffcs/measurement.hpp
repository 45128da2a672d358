#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ffcs/block_signal.hpp"
#include "ffcs/fusion_frame.hpp"
#include "ffcs/rng.hpp"

namespace ffcs {

enum class ColumnPolicy {
  Strict,       // non-unit columns are an error
  Renormalize,  // non-unit columns are rescaled and flagged
};

/// Sampling matrix A (n x N) with unit-norm columns.
class MeasurementMatrix {
public:
  explicit MeasurementMatrix(Eigen::MatrixXd entries, ColumnPolicy policy = ColumnPolicy::Strict);

  Eigen::Index rows() const noexcept { return a_.rows(); }
  Eigen::Index cols() const noexcept { return a_.cols(); }
  const Eigen::MatrixXd& entries() const noexcept { return a_; }
  auto column(std::size_t j) const { return a_.col(static_cast<Eigen::Index>(j)); }
  /// True when construction had to rescale at least one column.
  bool renormalized() const noexcept { return renormalized_; }

  /// Columns of A indexed by the support, in order.
  Eigen::MatrixXd columns(const SupportSet& s) const;

private:
  Eigen::MatrixXd a_;
  bool renormalized_ = false;
};

enum class BlockOperatorKind { Projection /* A_P */, Basis /* A_U */ };

/// Realized lifted operator. A_P has block (i, j) = a_ij P_j (nM x NM);
/// A_U has block (i, j) = a_ij U_j (nM x sum m_j). Row blocks follow
/// vectorize_rows of the n x M measurement matrix.
struct BlockOperator {
  BlockOperatorKind kind = BlockOperatorKind::Basis;
  Eigen::Index n = 0;
  Eigen::Index N = 0;
  Eigen::Index M = 0;
  std::vector<Eigen::Index> dims;
  Eigen::MatrixXd matrix;
};

/// Gaussian entries, columns normalized.
MeasurementMatrix random_measurement_matrix(Eigen::Index n, Eigen::Index N, Seed seed);

/// [I_n | H_n / sqrt(n)] with H_n the Sylvester Hadamard matrix; n must be a
/// power of two. Mutual coherence 1/sqrt(n).
MeasurementMatrix identity_hadamard_matrix(Eigen::Index n);

/// Y = A U(c) (n x M).
Eigen::MatrixXd measure(const MeasurementMatrix& a, const FusionFrame& f, const BlockCoefficients& c);

BlockOperator build_block_operator(const MeasurementMatrix& a, const FusionFrame& f,
                                   BlockOperatorKind kind);

/// A_U restricted to the blocks in `s` (nM x sum_{j in s} m_j), built directly.
Eigen::MatrixXd lifted_columns(const MeasurementMatrix& a, const FusionFrame& f, const SupportSet& s);

/// A_U^T A_U assembled block-wise as <a_j, a_k> U_j^T U_k.
Eigen::MatrixXd lifted_gram(const MeasurementMatrix& a, const FusionFrame& f);

/// vectorize_rows(A U(c)) for a concatenated coefficient vector.
Eigen::VectorXd apply_lifted(const MeasurementMatrix& a, const FusionFrame& f,
                             const Eigen::VectorXd& c);
/// A_U^T y for y = vectorize_rows(Y).
Eigen::VectorXd apply_lifted_transpose(const MeasurementMatrix& a, const FusionFrame& f,
                                       const Eigen::VectorXd& y);

/// max_{i != j} |<a_i, a_j>|.
double coherence(const MeasurementMatrix& a);

/// max_{j != k} |<a_j, a_k>| * overlap(j, k).
double fusion_coherence(const MeasurementMatrix& a, const FusionFrame& f);

/// max_{j not in S} ||pinv(A_S) a_j||_2; 0 when S covers every column.
/// Throws SingularityError if sigma_min(A_S) <= 1e-10.
double alpha_of_support(const MeasurementMatrix& a, const SupportSet& s);

void check_compatible(const MeasurementMatrix& a, const FusionFrame& f);

}  // namespace ffcs
