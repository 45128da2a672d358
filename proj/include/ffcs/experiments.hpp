#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ffcs/block_signal.hpp"
#include "ffcs/fusion_frame.hpp"
#include "ffcs/guarantees.hpp"
#include "ffcs/measurement.hpp"
#include "ffcs/rng.hpp"
#include "ffcs/solver.hpp"

namespace ffcs {

enum class FrameSource { Random, File, Designed };
enum class MatrixSource { Gaussian, File, IdentityHadamard };

struct ExperimentConfig {
  Eigen::Index M = 0;
  Eigen::Index N = 0;
  Eigen::Index n = 0;
  std::vector<Eigen::Index> m_values;
  std::vector<std::size_t> k_values;
  std::size_t trials = 1;
  Seed master_seed = 0;
  SolverOptions solver;
  FrameSource frame_source = FrameSource::Random;
  std::string frame_file;
  MatrixSource matrix_source = MatrixSource::Gaussian;
  std::string matrix_file;
  /// Planted support for every trial instead of a random one.
  std::optional<SupportSet> support;
  /// Designed frames: size of the random perturbation of the orthogonal
  /// support subspaces.
  double designed_perturbation = 0.01;
  std::string output;
  unsigned threads = 1;

  /// Throws ConfigError describing the first problem found. File sources are
  /// loaded and checked against M, N, n and m.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

std::string to_string(FrameSource s);
std::string to_string(MatrixSource s);

struct TrialRecord {
  Eigen::Index m = 0;
  std::size_t k = 0;
  Eigen::Index n = 0;
  std::size_t trial = 0;
  Seed seed = 0;
  bool recovered = false;
  double rel_error = 0.0;
  int iterations = 0;
  /// NaN where undefined (rank-deficient A_S, empty support for theta).
  double cert_margin = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
  SolveStatus status = SolveStatus::Converged;

  /// Recovered and the solver converged.
  bool success() const { return recovered && status == SolveStatus::Converged; }
};

struct CellSummary {
  Eigen::Index m = 0;
  std::size_t k = 0;
  Eigen::Index n = 0;
  std::size_t trials = 0;
  std::size_t recovered = 0;
  std::size_t failed = 0;
  std::size_t nonconverged = 0;
  std::size_t excluded = 0;
  double failure_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct PhaseDiagramResult {
  std::vector<TrialRecord> records;  // (cell, trial) order, m outer, k inner
  std::vector<CellSummary> cells;
};

/// Wilson score interval at 95% for `failures` out of `n`. n = 0 gives [0, 1].
std::pair<double, double> wilson_interval(std::size_t failures, std::size_t n);

/// Seed for trial `trial` of cell `cell`.
Seed trial_seed(Seed master, std::size_t cell, std::size_t trial);

/// Orthonormal bases for N subspaces of dimension m: the ones in `support`
/// are perturbed consecutive blocks of one random rotation (nearly
/// orthogonal), the rest are random.
FusionFrame designed_frame(Eigen::Index M, Eigen::Index N, Eigen::Index m,
                           const SupportSet& support, Seed seed, double perturbation);

/// One trial of a cell; deterministic in (cfg, m, k, seed).
TrialRecord run_trial(const ExperimentConfig& cfg, Eigen::Index m, std::size_t k,
                      std::size_t trial, Seed seed);

PhaseDiagramResult run_phase_diagram(const ExperimentConfig& cfg);

std::string trials_csv(const std::vector<TrialRecord>& records);
std::string summary_csv(const std::vector<CellSummary>& cells);
/// results.csv -> results_summary.csv
std::string summary_path(const std::string& output);

struct BoundRow {
  Eigen::Index m = 0;
  std::size_t k = 0;
  std::size_t trials = 0;
  std::size_t included = 0;
  std::size_t excluded = 0;
  std::size_t failures = 0;
  double empirical_failure = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha_max = 0.0;
  double theta_max = 0.0;
  double thm4_bound = 1.0;
  bool vacuous = true;
  /// thm4_bound >= ci_low.
  bool dominates = true;
};

/// Requires equal dims. Per cell, trials with undefined alpha or alpha >= 1
/// are excluded; the bound uses the largest alpha and theta among the rest.
std::vector<BoundRow> compare_bound_vs_empirical(const ExperimentConfig& cfg,
                                                 const PhaseDiagramResult& run);
std::vector<BoundRow> compare_bound_vs_empirical(const ExperimentConfig& cfg);
std::string bound_csv(const std::vector<BoundRow>& rows);

enum class LemmaConstruction { Random, Orthogonal, Identical };

struct LemmaBatteryConfig {
  Eigen::Index M = 12;
  Eigen::Index m = 3;
  Eigen::Index N = 10;
  std::size_t k = 4;
  /// Draws checked for the operator-norm bound only.
  std::size_t draws = 1000;
  /// Draws that also run the Monte Carlo checks.
  std::size_t mc_draws = 3;
  std::size_t samples = 100000;
  Seed seed = 0;
  LemmaConstruction construction = LemmaConstruction::Random;
  double lipschitz_bound_scale = 1.0;
  unsigned threads = 1;

  void validate() const;
};

LemmaBatteryConfig lemma_config_from_json(const nlohmann::json& j);

struct LemmaBatteryReport {
  std::size_t lemma4_checked = 0;
  std::size_t lemma4_failures = 0;
  std::size_t lemma4_tight = 0;
  double worst_lemma4_ratio = 0.0;  // max L / bound
  std::vector<LemmaReport> mc;
  bool all_passed = false;
};

LemmaBatteryReport run_lemma_battery(const LemmaBatteryConfig& cfg);
nlohmann::json lemma_report_to_json(const LemmaBatteryReport& r);

}  // namespace ffcs
