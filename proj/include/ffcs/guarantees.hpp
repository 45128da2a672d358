#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ffcs/block_signal.hpp"
#include "ffcs/fusion_frame.hpp"
#include "ffcs/measurement.hpp"
#include "ffcs/rng.hpp"

namespace ffcs {

/// Returned by coherence_recovery_bound when every sparsity is certified.
inline constexpr std::size_t kUnboundedSparsity = std::numeric_limits<std::size_t>::max();

/// Largest k with k < (1 + 1/mu_f) / 2, or kUnboundedSparsity for mu_f = 0.
std::size_t coherence_recovery_bound(double mu_f);

struct FripResult {
  std::size_t k = 0;
  double delta_k = 0.0;
  std::vector<SupportSet> extremal_supports;
  std::size_t supports_enumerated = 0;
};

/// Fusion RIP constant over k-block-sparse coefficient vectors with each block
/// in its subspace (i.e. through A_U). Throws ResourceError if C(N, k) > 1e6.
FripResult frip_constant(const MeasurementMatrix& a, const FusionFrame& f, std::size_t k,
                         unsigned threads = 1);

struct FripFlags {
  bool exact_ok = false;  // delta_2k < 1/3
  bool noisy_ok = false;  // delta_2k < sqrt(2) - 1
};
FripFlags frip_recovery_checks(double delta_2k);

/// Classical RIP constant of A by enumerating column supports of size k.
double classical_rip_constant(const MeasurementMatrix& a, std::size_t k, unsigned threads = 1);

/// frip_constant <= classical_rip_constant + 1e-10.
bool rip_dominates_frip(const MeasurementMatrix& a, const FusionFrame& f, std::size_t k);

struct CertificateResult {
  bool passed = false;
  double margin = 0.0;
  /// Index attaining the maximum; N when no index lies outside the support.
  std::size_t worst_j = 0;
};

/// margin = 1 - max_{j not in S} ||sgn(U(c)_S)^T A_S^+ a_j||_2, S = supp(c).
/// Throws SingularityError when A_S is rank deficient.
CertificateResult dual_certificate_check(const MeasurementMatrix& a, const FusionFrame& f,
                                         const BlockCoefficients& c);

struct NspResult {
  bool violation_found = false;
  double worst_ratio = 0.0;
  Eigen::Index null_dim = 0;
};

/// max over |S| <= k of ||h_S||_{2,1} / ||h||_{2,1} for a concatenated h.
double nsp_ratio(const FusionFrame& f, const Eigen::VectorXd& h, std::size_t k);

/// Sampled fusion null space property check. Evidence only: a pass does not
/// prove the property.
NspResult nsp_sampled_check(const MeasurementMatrix& a, const FusionFrame& f, std::size_t k,
                            std::size_t trials, Seed seed);

struct Theorem4Bound {
  double alpha = 0.0;
  double theta = 1.0;
  double m = 1.0;
  std::size_t N = 0;
  std::size_t k = 0;
  double delta_star = 0.0;
  /// Additive form minimized over the delta grid, unclipped and clipped to [0, 1].
  double additive_raw = 1.0;
  double bound = 1.0;
  /// N exp(-rate m) with rate = max_delta min{...}; unclipped and clipped.
  double single_exponential_raw = 1.0;
  double single_exponential = 1.0;
  double rate = 0.0;
  /// Largest change of the additive form between adjacent grid points.
  double grid_resolution_error = 0.0;
  /// alpha >= 1: the delta interval is empty.
  bool degenerate = false;
};

inline constexpr std::size_t kTheorem4GridPoints = 10000;

Theorem4Bound theorem4_failure_bound(double alpha, double theta, double m, std::size_t N,
                                     std::size_t k);

/// Throws ArgumentError unless all weights are 1 and all dims are equal.
void require_equal_dims_unit_weights(const FusionFrame& f);

struct TailCheck {
  double u = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct LemmaReport {
  double lipschitz = 0.0;       // L = ||sum_l b_l U~_{j_l}||_{2->2}
  double theta = 1.0;
  double lipschitz_bound = 0.0; // ||b||_inf sqrt(theta), times the self-test scale
  bool lemma4_passed = false;
  bool lemma4_tight = false;    // L equals the unscaled bound within 1e-10
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double mean_bound = 0.0;      // sqrt(m) ||b||_2
  bool lemma3_passed = false;
  std::vector<TailCheck> tails;
  bool all_passed = false;
};

/// ||sum_l b_l U~_{j_l}||_{2->2}, the Lipschitz constant of
/// X -> ||sum_l b_l U~_{j_l} X||_2. Requires equal dims and |b| = |S|.
double lipschitz_constant(const FusionFrame& f, const SupportSet& s, const Eigen::VectorXd& b);

struct LemmaOptions {
  unsigned threads = 1;
  /// Self-test hook: scales the Lipschitz bound and the L used in the tail
  /// bound. 1 in normal use.
  double lipschitz_bound_scale = 1.0;
};

LemmaReport verify_probabilistic_lemmas(const FusionFrame& f, const SupportSet& s,
                                        const Eigen::VectorXd& b, std::size_t samples, Seed seed,
                                        const LemmaOptions& opts = {});

}  // namespace ffcs
