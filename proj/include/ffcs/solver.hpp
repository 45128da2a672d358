#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ffcs/block_signal.hpp"
#include "ffcs/fusion_frame.hpp"
#include "ffcs/measurement.hpp"

namespace ffcs {

struct SolverOptions {
  double feasibility_tol = 1e-8;
  double objective_rel_tol = 1e-6;
  int max_iterations = 100000;
  /// Initial ADMM penalty, relative to the data scale; rebalanced while iterating.
  double penalty_parameter = 1.0;
  /// Output blocks with norm at or below this are set to zero.
  double hard_threshold = 1e-9;

  /// Throws ArgumentError on non-positive tolerances or max_iterations < 1.
  void validate() const;
};

enum class SolveStatus { Converged, MaxIterations, Infeasible };

std::string to_string(SolveStatus s);
SolveStatus solve_status_from_string(const std::string& s);

struct SolveReport {
  SolveStatus status = SolveStatus::Infeasible;
  int iterations = 0;
  /// ||A U(c) - Y||_F of the returned coefficients.
  double final_feasibility_residual = 0.0;
  /// ||c||_{2,1} of the returned coefficients.
  double final_objective = 0.0;
  BlockCoefficients coefficients;
  /// Dual matrix Lambda (vectorize_rows, length nM) certifying optimality:
  /// block j of A_U^T Lambda is c_j / ||c_j|| on the support and has norm
  /// <= 1 elsewhere, up to `certificate_residual`. Empty when no certificate
  /// was produced (P0, infeasible).
  Eigen::VectorXd multiplier;
  double certificate_residual = 0.0;
  /// P0 only: every support of minimal size that fits Y.
  std::vector<SupportSet> optimal_supports;
  bool unique = true;
};

/// min ||c||_{2,1} subject to A U(c) = Y.
SolveReport solve_p1(const MeasurementMatrix& a, const FusionFrame& f, const Eigen::MatrixXd& y,
                     const SolverOptions& opts = {});

/// min ||c||_{2,1} subject to ||A U(c) - Y||_F <= eta. eta = 0 is the
/// equality program.
SolveReport solve_p1_noisy(const MeasurementMatrix& a, const FusionFrame& f,
                           const Eigen::MatrixXd& y, double eta, const SolverOptions& opts = {});

/// Exhaustive l_{2,0} minimization over supports of size 0..k_max.
/// Throws ResourceError when C(N, k_max) > 1e6.
SolveReport solve_p0_bruteforce(const MeasurementMatrix& a, const FusionFrame& f,
                                const Eigen::MatrixXd& y, std::size_t k_max,
                                const SolverOptions& opts = {});

/// ||c_hat - c_true||_{2,2} <= rel_tol * max(||c_true||_{2,2}, 1e-12).
bool recovered(const BlockCoefficients& c_true, const BlockCoefficients& c_hat,
               double rel_tol = 1e-4);

/// Largest violation of the first-order optimality conditions for c with
/// dual Lambda: on blocks with ||c_j|| > zero_threshold, the distance of block
/// j of A_U^T Lambda from c_j/||c_j||; elsewhere, the excess of its norm over 1.
double optimality_residual(const MeasurementMatrix& a, const FusionFrame& f,
                           const BlockCoefficients& c, const Eigen::VectorXd& multiplier,
                           double zero_threshold = kZeroBlockThreshold);

}  // namespace ffcs
