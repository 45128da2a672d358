#include "ffcs/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

#include "ffcs/errors.hpp"
#include "ffcs/io.hpp"
#include "ffcs/linalg.hpp"

namespace ffcs {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kWilsonZ = 1.959963984540054;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MatrixXd orthonormalize(const MatrixXd& b) {
  Eigen::HouseholderQR<MatrixXd> qr(b);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(b.rows(), b.cols());
  const MatrixXd r = qr.matrixQR().topRows(b.cols()).triangularView<Eigen::Upper>();
  for (Index j = 0; j < b.cols(); ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

MatrixXd random_rotation(Index M, RandomStream& rs) { return orthonormalize(rs.normal_matrix(M, M)); }

struct Sources {
  std::optional<FusionFrame> frame;
  std::optional<MeasurementMatrix> matrix;
};

Sources load_sources(const ExperimentConfig& cfg) {
  Sources s;
  if (cfg.frame_source == FrameSource::File) s.frame = load_frame(cfg.frame_file);
  if (cfg.matrix_source == MatrixSource::File) s.matrix = load_matrix(cfg.matrix_file);
  return s;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown " + where + " field '" + key + "'");
}

TrialRecord run_trial_with(const ExperimentConfig& cfg, const Sources& src, Index m,
                           std::size_t k, std::size_t trial, Seed seed) {
  TrialRecord rec;
  rec.m = m;
  rec.k = k;
  rec.n = cfg.n;
  rec.trial = trial;
  rec.seed = seed;

  const SupportSet support = cfg.support ? *cfg.support
                                         : random_support(static_cast<std::size_t>(cfg.N), k,
                                                          derive_seed(seed, {3}));
  FusionFrame frame = [&] {
    switch (cfg.frame_source) {
      case FrameSource::File: return *src.frame;
      case FrameSource::Designed:
        return designed_frame(cfg.M, cfg.N, m, support, derive_seed(seed, {1}),
                              cfg.designed_perturbation);
      case FrameSource::Random: break;
    }
    return random_fusion_frame(cfg.M, std::vector<Index>(static_cast<std::size_t>(cfg.N), m),
                               derive_seed(seed, {1}));
  }();
  MeasurementMatrix a = [&] {
    switch (cfg.matrix_source) {
      case MatrixSource::File: return *src.matrix;
      case MatrixSource::IdentityHadamard: return identity_hadamard_matrix(cfg.n);
      case MatrixSource::Gaussian: break;
    }
    return random_measurement_matrix(cfg.n, cfg.N, derive_seed(seed, {2}));
  }();

  const BlockCoefficients c = random_gaussian_signal(frame, support, derive_seed(seed, {4}));
  const MatrixXd y = measure(a, frame, c);
  const SolveReport rep = solve_p1(a, frame, y, cfg.solver);
  rec.status = rep.status;
  rec.iterations = rep.iterations;
  rec.recovered = rep.coefficients.size() == c.size() && recovered(c, rep.coefficients);
  double diff = 0.0, ref = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    diff += (rep.coefficients[j] - c[j]).squaredNorm();
    ref += c[j].squaredNorm();
  }
  rec.rel_error = std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12);
  try {
    rec.cert_margin = dual_certificate_check(a, frame, c).margin;
  } catch (const SingularityError&) {
    rec.cert_margin = kNaN;
  }
  try {
    rec.alpha = alpha_of_support(a, support);
  } catch (const SingularityError&) {
    rec.alpha = kNaN;
  }
  rec.theta = support.empty() ? kNaN : theta_of_support(frame, support);
  return rec;
}

}  // namespace

std::string to_string(FrameSource s) {
  switch (s) {
    case FrameSource::Random: return "random";
    case FrameSource::File: return "file";
    case FrameSource::Designed: return "designed";
  }
  return "random";
}

std::string to_string(MatrixSource s) {
  switch (s) {
    case MatrixSource::Gaussian: return "gaussian";
    case MatrixSource::File: return "file";
    case MatrixSource::IdentityHadamard: return "identity_hadamard";
  }
  return "gaussian";
}

void ExperimentConfig::validate() const {
  if (M < 1 || N < 1 || n < 1) throw ConfigError("M, N and n must be positive");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (m_values.empty()) throw ConfigError("m_values must be nonempty");
  if (k_values.empty()) throw ConfigError("k_values must be nonempty");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  try {
    solver.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  for (auto m : m_values)
    if (m < 1 || m > M)
      throw ConfigError("cell m=" + std::to_string(m) + ": need 1 <= m <= M=" + std::to_string(M));
  for (auto k : k_values)
    if (k > static_cast<std::size_t>(N))
      throw ConfigError("cell k=" + std::to_string(k) + ": k exceeds N=" + std::to_string(N));
  if (support) {
    try {
      support->check_range(static_cast<std::size_t>(N));
    } catch (const IndexError& e) {
      throw ConfigError(std::string("support: ") + e.what());
    }
    for (auto k : k_values)
      if (k != support->size())
        throw ConfigError("cell k=" + std::to_string(k) + ": fixed support has size " +
                          std::to_string(support->size()));
  }
  if (frame_source == FrameSource::File) {
    if (frame_file.empty()) throw ConfigError("frame_source=file needs frame_file");
    const FusionFrame f = load_frame(frame_file);
    if (f.ambient_dim() != M || static_cast<Index>(f.size()) != N)
      throw ConfigError("frame file does not match M and N");
    if (f.common_dim() == 0) throw ConfigError("frame file must have equal subspace dimensions");
    for (auto m : m_values)
      if (m != f.common_dim())
        throw ConfigError("cell m=" + std::to_string(m) + ": frame file has dimension " +
                          std::to_string(f.common_dim()));
  }
  if (frame_source == FrameSource::Designed)
    for (auto m : m_values)
      for (auto k : k_values)
        if (static_cast<Index>(k) * m > M)
          throw ConfigError("cell m=" + std::to_string(m) + ", k=" + std::to_string(k) +
                            ": designed frame needs k*m <= M");
  if (matrix_source == MatrixSource::File) {
    if (matrix_file.empty()) throw ConfigError("matrix_source=file needs matrix_file");
    const MeasurementMatrix a = load_matrix(matrix_file);
    if (a.rows() != n || a.cols() != N) throw ConfigError("matrix file does not match n and N");
  }
  if (matrix_source == MatrixSource::IdentityHadamard) {
    if (N != 2 * n) throw ConfigError("identity_hadamard needs N = 2n");
    if ((n & (n - 1)) != 0) throw ConfigError("identity_hadamard needs n a power of two");
  }
  if (!(designed_perturbation >= 0.0)) throw ConfigError("designed_perturbation must be >= 0");
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"M", "N", "n", "m_values", "k_values", "trials", "master_seed", "solver",
                  "frame_source", "frame_file", "matrix_source", "matrix_file", "support",
                  "designed_perturbation", "output", "threads"},
                 "config");
  ExperimentConfig c;
  c.M = get_or<Index>(j, "M", 0);
  c.N = get_or<Index>(j, "N", 0);
  c.n = get_or<Index>(j, "n", 0);
  c.m_values = get_or<std::vector<Index>>(j, "m_values", {});
  c.k_values = get_or<std::vector<std::size_t>>(j, "k_values", {});
  c.trials = get_or<std::size_t>(j, "trials", 1);
  c.master_seed = get_or<Seed>(j, "master_seed", 0);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    reject_unknown(s,
                   {"feasibility_tol", "objective_rel_tol", "max_iterations", "penalty_parameter",
                    "hard_threshold"},
                   "solver");
    c.solver.feasibility_tol = get_or(s, "feasibility_tol", c.solver.feasibility_tol);
    c.solver.objective_rel_tol = get_or(s, "objective_rel_tol", c.solver.objective_rel_tol);
    c.solver.max_iterations = get_or(s, "max_iterations", c.solver.max_iterations);
    c.solver.penalty_parameter = get_or(s, "penalty_parameter", c.solver.penalty_parameter);
    c.solver.hard_threshold = get_or(s, "hard_threshold", c.solver.hard_threshold);
  }
  const auto fs = get_or<std::string>(j, "frame_source", "random");
  if (fs == "random") c.frame_source = FrameSource::Random;
  else if (fs == "file") c.frame_source = FrameSource::File;
  else if (fs == "designed") c.frame_source = FrameSource::Designed;
  else throw ConfigError("unknown frame_source '" + fs + "'");
  c.frame_file = get_or<std::string>(j, "frame_file", "");
  const auto ms = get_or<std::string>(j, "matrix_source", "gaussian");
  if (ms == "gaussian") c.matrix_source = MatrixSource::Gaussian;
  else if (ms == "file") c.matrix_source = MatrixSource::File;
  else if (ms == "identity_hadamard") c.matrix_source = MatrixSource::IdentityHadamard;
  else throw ConfigError("unknown matrix_source '" + ms + "'");
  c.matrix_file = get_or<std::string>(j, "matrix_file", "");
  if (j.contains("support") && !j.at("support").is_null()) {
    try {
      c.support = SupportSet(get_or<std::vector<std::size_t>>(j, "support", {}));
    } catch (const IndexError& e) {
      throw ConfigError(std::string("support: ") + e.what());
    }
  }
  c.designed_perturbation = get_or(j, "designed_perturbation", c.designed_perturbation);
  c.output = get_or<std::string>(j, "output", "");
  c.threads = get_or<unsigned>(j, "threads", 1);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j = {{"M", c.M},
            {"N", c.N},
            {"n", c.n},
            {"m_values", c.m_values},
            {"k_values", c.k_values},
            {"trials", c.trials},
            {"master_seed", c.master_seed},
            {"solver",
             {{"feasibility_tol", c.solver.feasibility_tol},
              {"objective_rel_tol", c.solver.objective_rel_tol},
              {"max_iterations", c.solver.max_iterations},
              {"penalty_parameter", c.solver.penalty_parameter},
              {"hard_threshold", c.solver.hard_threshold}}},
            {"frame_source", to_string(c.frame_source)},
            {"matrix_source", to_string(c.matrix_source)},
            {"designed_perturbation", c.designed_perturbation},
            {"threads", c.threads}};
  if (!c.frame_file.empty()) j["frame_file"] = c.frame_file;
  if (!c.matrix_file.empty()) j["matrix_file"] = c.matrix_file;
  if (c.support) j["support"] = c.support->indices();
  if (!c.output.empty()) j["output"] = c.output;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig c = config_from_json(read_json_file(path));
  // Relative file references are relative to the config file.
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  resolve(c.frame_file);
  resolve(c.matrix_file);
  return c;
}

std::pair<double, double> wilson_interval(std::size_t failures, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(failures) / nn;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // the closed form only reaches 0 and 1 up to rounding
  const double lo = failures == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = failures == n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

Seed trial_seed(Seed master, std::size_t cell, std::size_t trial) {
  return derive_seed(master, {cell, trial});
}

FusionFrame designed_frame(Index M, Index N, Index m, const SupportSet& support, Seed seed,
                           double perturbation) {
  support.check_range(static_cast<std::size_t>(N));
  if (static_cast<Index>(support.size()) * m > M)
    throw DimensionError("designed frame needs |S| * m <= M");
  RandomStream rot(derive_seed(seed, {0}));
  const MatrixXd q = random_rotation(M, rot);
  std::vector<SubspaceBasis> subs;
  std::size_t slot = 0;
  for (Index j = 0; j < N; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    if (support.contains(jj)) {
      RandomStream rs(derive_seed(seed, {1, jj}));
      const MatrixXd b = q.middleCols(static_cast<Index>(slot) * m, m) +
                         perturbation * rs.normal_matrix(M, m);
      subs.emplace_back(orthonormalize(b));
      ++slot;
    } else {
      subs.push_back(random_subspace(M, m, derive_seed(seed, {2, jj})));
    }
  }
  return FusionFrame(std::move(subs));
}

TrialRecord run_trial(const ExperimentConfig& cfg, Index m, std::size_t k, std::size_t trial,
                      Seed seed) {
  return run_trial_with(cfg, load_sources(cfg), m, k, trial, seed);
}

PhaseDiagramResult run_phase_diagram(const ExperimentConfig& cfg) {
  cfg.validate();
  const Sources src = load_sources(cfg);
  struct Task {
    Index m;
    std::size_t k;
    std::size_t cell;
    std::size_t trial;
  };
  std::vector<Task> tasks;
  std::size_t cell = 0;
  for (auto m : cfg.m_values)
    for (auto k : cfg.k_values) {
      for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({m, k, cell, t});
      ++cell;
    }
  PhaseDiagramResult out;
  out.records.resize(tasks.size());
  parallel_chunks(tasks.size(), cfg.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Task& t = tasks[i];
      out.records[i] = run_trial_with(cfg, src, t.m, t.k, t.trial,
                                      trial_seed(cfg.master_seed, t.cell, t.trial));
    }
  });
  for (std::size_t c = 0; c < cell; ++c) {
    CellSummary s;
    const std::size_t first = c * cfg.trials;
    s.m = out.records[first].m;
    s.k = out.records[first].k;
    s.n = cfg.n;
    s.trials = cfg.trials;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const TrialRecord& r = out.records[first + t];
      if (r.success()) ++s.recovered;
      else ++s.failed;
      if (r.status != SolveStatus::Converged) ++s.nonconverged;
    }
    s.failure_rate = static_cast<double>(s.failed) / static_cast<double>(s.trials);
    std::tie(s.ci_low, s.ci_high) = wilson_interval(s.failed, s.trials);
    out.cells.push_back(s);
  }
  return out;
}

std::string trials_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "# schema=1\n";
  os << "m,k,n,trial,seed,recovered,rel_error,iterations,cert_margin,alpha,theta,status\n";
  for (const auto& r : records)
    os << r.m << ',' << r.k << ',' << r.n << ',' << r.trial << ',' << r.seed << ','
       << (r.recovered ? 1 : 0) << ',' << fmt(r.rel_error) << ',' << r.iterations << ','
       << fmt(r.cert_margin) << ',' << fmt(r.alpha) << ',' << fmt(r.theta) << ','
       << to_string(r.status) << '\n';
  return os.str();
}

std::string summary_csv(const std::vector<CellSummary>& cells) {
  std::ostringstream os;
  os << "# schema=1\n";
  os << "m,k,n,trials,recovered,failed,excluded,nonconverged,failure_rate,ci_low,ci_high\n";
  for (const auto& s : cells)
    os << s.m << ',' << s.k << ',' << s.n << ',' << s.trials << ',' << s.recovered << ','
       << s.failed << ',' << s.excluded << ',' << s.nonconverged << ',' << fmt(s.failure_rate)
       << ',' << fmt(s.ci_low) << ',' << fmt(s.ci_high) << '\n';
  return os.str();
}

std::string summary_path(const std::string& output) {
  std::filesystem::path p(output);
  const std::string stem = p.stem().string();
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  return (p.parent_path() / (stem + "_summary" + ext)).string();
}

std::vector<BoundRow> compare_bound_vs_empirical(const ExperimentConfig& cfg,
                                                 const PhaseDiagramResult& run) {
  std::vector<BoundRow> rows;
  for (const auto& cell : run.cells) {
    BoundRow row;
    row.m = cell.m;
    row.k = cell.k;
    row.trials = cell.trials;
    row.alpha_max = 0.0;
    row.theta_max = 1.0;
    for (const auto& r : run.records) {
      if (r.m != cell.m || r.k != cell.k) continue;
      if (std::isnan(r.alpha) || r.alpha >= 1.0) {
        ++row.excluded;
        continue;
      }
      ++row.included;
      if (!r.success()) ++row.failures;
      row.alpha_max = std::max(row.alpha_max, r.alpha);
      if (!std::isnan(r.theta)) row.theta_max = std::max(row.theta_max, r.theta);
    }
    if (row.included == 0) {
      row.empirical_failure = kNaN;
      row.ci_low = 0.0;
      row.ci_high = 1.0;
      row.alpha_max = kNaN;
      row.theta_max = kNaN;
      row.thm4_bound = 1.0;
    } else {
      row.empirical_failure =
          static_cast<double>(row.failures) / static_cast<double>(row.included);
      std::tie(row.ci_low, row.ci_high) = wilson_interval(row.failures, row.included);
      row.thm4_bound = row.k < static_cast<std::size_t>(cfg.N)
                           ? theorem4_failure_bound(row.alpha_max, row.theta_max,
                                                    static_cast<double>(row.m),
                                                    static_cast<std::size_t>(cfg.N), row.k)
                                 .bound
                           : 1.0;
    }
    row.vacuous = row.thm4_bound >= 1.0;
    row.dominates = row.thm4_bound >= row.ci_low;
    rows.push_back(row);
  }
  return rows;
}

std::vector<BoundRow> compare_bound_vs_empirical(const ExperimentConfig& cfg) {
  cfg.validate();
  return compare_bound_vs_empirical(cfg, run_phase_diagram(cfg));
}

std::string bound_csv(const std::vector<BoundRow>& rows) {
  std::ostringstream os;
  os << "# schema=1\n";
  os << "m,k,trials,included,excluded,failures,empirical_failure,ci_low,ci_high,alpha_max,"
        "theta_max,thm4_bound,vacuous,dominates\n";
  for (const auto& r : rows)
    os << r.m << ',' << r.k << ',' << r.trials << ',' << r.included << ',' << r.excluded << ','
       << r.failures << ',' << fmt(r.empirical_failure) << ',' << fmt(r.ci_low) << ','
       << fmt(r.ci_high) << ',' << fmt(r.alpha_max) << ',' << fmt(r.theta_max) << ','
       << fmt(r.thm4_bound) << ',' << (r.vacuous ? 1 : 0) << ',' << (r.dominates ? 1 : 0)
       << '\n';
  return os.str();
}

void LemmaBatteryConfig::validate() const {
  if (M < 1 || m < 1 || m > M || N < 1) throw ConfigError("lemma battery: need 1 <= m <= M, N >= 1");
  if (k < 1 || k > static_cast<std::size_t>(N)) throw ConfigError("lemma battery: need 1 <= k <= N");
  if (construction == LemmaConstruction::Orthogonal && static_cast<Index>(k) * m > M)
    throw ConfigError("lemma battery: orthogonal construction needs k*m <= M");
  if (mc_draws > 0 && samples < 2) throw ConfigError("lemma battery: samples must be >= 2");
  if (mc_draws > draws) throw ConfigError("lemma battery: mc_draws exceeds draws");
  if (!(lipschitz_bound_scale > 0.0)) throw ConfigError("lemma battery: scale must be positive");
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

LemmaBatteryConfig lemma_config_from_json(const json& j) {
  reject_unknown(j,
                 {"M", "m", "N", "k", "draws", "mc_draws", "samples", "seed", "construction",
                  "lipschitz_bound_scale", "threads"},
                 "lemma battery");
  LemmaBatteryConfig c;
  c.M = get_or(j, "M", c.M);
  c.m = get_or(j, "m", c.m);
  c.N = get_or(j, "N", c.N);
  c.k = get_or(j, "k", c.k);
  c.draws = get_or(j, "draws", c.draws);
  c.mc_draws = get_or(j, "mc_draws", c.mc_draws);
  c.samples = get_or(j, "samples", c.samples);
  c.seed = get_or(j, "seed", c.seed);
  const auto con = get_or<std::string>(j, "construction", "random");
  if (con == "random") c.construction = LemmaConstruction::Random;
  else if (con == "orthogonal") c.construction = LemmaConstruction::Orthogonal;
  else if (con == "identical") c.construction = LemmaConstruction::Identical;
  else throw ConfigError("unknown construction '" + con + "'");
  c.lipschitz_bound_scale = get_or(j, "lipschitz_bound_scale", c.lipschitz_bound_scale);
  c.threads = get_or(j, "threads", c.threads);
  return c;
}

LemmaBatteryReport run_lemma_battery(const LemmaBatteryConfig& cfg) {
  cfg.validate();
  LemmaBatteryReport rep;
  bool ok = true;
  for (std::size_t d = 0; d < cfg.draws; ++d) {
    const Seed sd = derive_seed(cfg.seed, {d});
    const SupportSet s = random_support(static_cast<std::size_t>(cfg.N), cfg.k, derive_seed(sd, {1}));
    FusionFrame base = random_fusion_frame(
        cfg.M, std::vector<Index>(static_cast<std::size_t>(cfg.N), cfg.m), derive_seed(sd, {2}));
    std::vector<SubspaceBasis> subs = base.subspaces();
    RandomStream rs(derive_seed(sd, {3}));
    VectorXd b = rs.normal_vector(static_cast<Index>(cfg.k));
    if (cfg.construction == LemmaConstruction::Orthogonal) {
      const MatrixXd q = random_rotation(cfg.M, rs);
      for (std::size_t l = 0; l < s.size(); ++l)
        subs[s.indices()[l]] = SubspaceBasis(q.middleCols(static_cast<Index>(l) * cfg.m, cfg.m));
    } else if (cfg.construction == LemmaConstruction::Identical) {
      for (auto j : s.indices()) subs[j] = subs[s.indices().front()];
      b = VectorXd::Ones(static_cast<Index>(cfg.k));
    }
    const FusionFrame f(std::move(subs));
    const double bound_unscaled = b.cwiseAbs().maxCoeff() * std::sqrt(theta_of_support(f, s));
    const double l = lipschitz_constant(f, s, b);
    const double tol = 1e-10 * std::max(1.0, bound_unscaled);
    ++rep.lemma4_checked;
    if (l > cfg.lipschitz_bound_scale * bound_unscaled + tol) ++rep.lemma4_failures;
    if (std::abs(l - bound_unscaled) <= tol) ++rep.lemma4_tight;
    rep.worst_lemma4_ratio = std::max(rep.worst_lemma4_ratio, l / bound_unscaled);
    if (d < cfg.mc_draws) {
      LemmaOptions opts;
      opts.threads = cfg.threads;
      opts.lipschitz_bound_scale = cfg.lipschitz_bound_scale;
      rep.mc.push_back(verify_probabilistic_lemmas(f, s, b, cfg.samples, derive_seed(sd, {4}), opts));
      ok = ok && rep.mc.back().all_passed;
    }
  }
  rep.all_passed = ok && rep.lemma4_failures == 0;
  return rep;
}

json lemma_report_to_json(const LemmaBatteryReport& r) {
  json mc = json::array();
  for (const auto& x : r.mc) {
    json tails = json::array();
    for (const auto& t : x.tails)
      tails.push_back({{"u", t.u},
                       {"empirical", t.empirical},
                       {"std_error", t.std_error},
                       {"bound", t.bound},
                       {"passed", t.passed}});
    mc.push_back({{"lipschitz", x.lipschitz},
                  {"theta", x.theta},
                  {"lipschitz_bound", x.lipschitz_bound},
                  {"lemma4_passed", x.lemma4_passed},
                  {"lemma4_tight", x.lemma4_tight},
                  {"mc_mean", x.mc_mean},
                  {"mc_std_error", x.mc_stderr},
                  {"mean_bound", x.mean_bound},
                  {"lemma3_passed", x.lemma3_passed},
                  {"tails", tails},
                  {"all_passed", x.all_passed}});
  }
  return {{"lemma4_checked", r.lemma4_checked},
          {"lemma4_failures", r.lemma4_failures},
          {"lemma4_tight", r.lemma4_tight},
          {"worst_lemma4_ratio", r.worst_lemma4_ratio},
          {"monte_carlo", mc},
          {"all_passed", r.all_passed}};
}

}  // namespace ffcs
