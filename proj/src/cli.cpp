#include "ffcs/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "ffcs/errors.hpp"
#include "ffcs/experiments.hpp"
#include "ffcs/guarantees.hpp"
#include "ffcs/io.hpp"
#include "ffcs/solver.hpp"

namespace ffcs {

namespace {

using Eigen::Index;
using nlohmann::json;

// Signals a failed check after the result has been written.
struct CheckFailed {};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ColumnPolicy policy_of(bool renormalize) {
  return renormalize ? ColumnPolicy::Renormalize : ColumnPolicy::Strict;
}

MeasurementMatrix load_matrix_noted(const std::string& path, bool renormalize, std::ostream& err) {
  MeasurementMatrix a = load_matrix(path, policy_of(renormalize));
  if (a.renormalized())
    err << "warning: renormalized: columns of '" << path << "' were rescaled to unit norm\n";
  return a;
}

struct GenFrameArgs {
  Index M = 0, N = 0, m = 0;
  std::vector<Index> dims;
  Seed seed = 0;
  std::string out;
};

struct GenMatrixArgs {
  Index n = 0, N = 0;
  Seed seed = 0;
  std::string kind = "gaussian";
  std::string out;
};

struct MeasureArgs {
  std::string matrix, frame, coefficients, signal_out, out;
  std::size_t k = 0;
  bool k_set = false;
  Seed seed = 0;
  double noise = 0.0;
  bool renormalize = true;
};

struct SolveArgs {
  std::string matrix, frame, measurements, out, report;
  double eta = 0.0;
  double tol = 1e-8;
  int max_iters = 100000;
  std::string method = "p1";
  std::size_t kmax = 2;
  bool renormalize = true;
};

struct CertifyArgs {
  std::string matrix, frame, signal;
  std::vector<std::size_t> support;
  std::size_t kmax = 2;
  unsigned threads = 1;
  bool renormalize = true;
};

struct ExperimentArgs {
  std::string config, out;
  std::optional<Index> M, N, n;
  std::vector<Index> m_values;
  std::vector<std::size_t> k_values;
  std::optional<std::size_t> trials;
  std::optional<Seed> seed;
  std::optional<unsigned> threads;
  std::string frame_source, matrix_source;
};

struct LemmaArgs {
  std::string config, out;
  std::optional<Index> M, m, N;
  std::optional<std::size_t> k, draws, mc_draws, samples;
  std::optional<Seed> seed;
  std::optional<unsigned> threads;
  std::string construction;
  bool self_test = false;
};

void add_experiment_options(CLI::App* sub, ExperimentArgs& a) {
  sub->add_option("--config", a.config, "Experiment config file");
  sub->add_option("--out", a.out, "Output CSV path");
  sub->add_option("--M", a.M, "Ambient dimension");
  sub->add_option("--N", a.N, "Number of subspaces");
  sub->add_option("--n", a.n, "Number of measurements");
  sub->add_option("--m", a.m_values, "Subspace dimensions (cells)");
  sub->add_option("--k", a.k_values, "Sparsity levels (cells)");
  sub->add_option("--trials", a.trials, "Trials per cell");
  sub->add_option("--seed", a.seed, "Master seed");
  sub->add_option("--threads", a.threads, "Worker threads");
  sub->add_option("--frame-source", a.frame_source, "random | file | designed");
  sub->add_option("--matrix-source", a.matrix_source, "gaussian | file | identity_hadamard");
}

ExperimentConfig experiment_config(const ExperimentArgs& a) {
  ExperimentConfig c;
  if (!a.config.empty()) c = load_config(a.config);
  if (a.M) c.M = *a.M;
  if (a.N) c.N = *a.N;
  if (a.n) c.n = *a.n;
  if (!a.m_values.empty()) c.m_values = a.m_values;
  if (!a.k_values.empty()) c.k_values = a.k_values;
  if (a.trials) c.trials = *a.trials;
  if (a.seed) c.master_seed = *a.seed;
  if (a.threads) c.threads = *a.threads;
  if (!a.out.empty()) c.output = a.out;
  if (!a.frame_source.empty() || !a.matrix_source.empty()) {
    json j = config_to_json(c);
    if (!a.frame_source.empty()) j["frame_source"] = a.frame_source;
    if (!a.matrix_source.empty()) j["matrix_source"] = a.matrix_source;
    const ExperimentConfig parsed = config_from_json(j);
    c.frame_source = parsed.frame_source;
    c.matrix_source = parsed.matrix_source;
  }
  if (c.output.empty()) throw ConfigError("no output path (use --out or the config 'output' field)");
  c.validate();
  return c;
}

int run_gen_frame(const GenFrameArgs& a, std::ostream& out) {
  std::vector<Index> dims = a.dims;
  if (dims.empty()) {
    if (a.N < 1 || a.m < 1) throw ConfigError("gen-frame needs --dims or both --N and --m");
    dims.assign(static_cast<std::size_t>(a.N), a.m);
  }
  const FusionFrame f = random_fusion_frame(a.M, dims, a.seed);
  write_json_file(a.out, frame_to_json(f));
  out << "wrote frame M=" << f.ambient_dim() << " N=" << f.size() << " to " << a.out << "\n";
  return kExitOk;
}

int run_gen_matrix(const GenMatrixArgs& a, std::ostream& out) {
  std::optional<MeasurementMatrix> m;
  if (a.kind == "gaussian") m = random_measurement_matrix(a.n, a.N, a.seed);
  else if (a.kind == "identity_hadamard") m = identity_hadamard_matrix(a.n);
  else throw ConfigError("unknown matrix kind '" + a.kind + "'");
  write_json_file(a.out, matrix_to_json(*m));
  out << "wrote matrix " << m->rows() << "x" << m->cols() << " to " << a.out << "\n";
  return kExitOk;
}

int run_measure(const MeasureArgs& a, std::ostream& out, std::ostream& err) {
  const MeasurementMatrix mat = load_matrix_noted(a.matrix, a.renormalize, err);
  const FusionFrame f = load_frame(a.frame);
  BlockCoefficients c;
  if (!a.coefficients.empty()) {
    c = load_coefficients(a.coefficients);
  } else if (a.k_set) {
    const SupportSet s = random_support(f.size(), a.k, derive_seed(a.seed, {0}));
    c = random_gaussian_signal(f, s, derive_seed(a.seed, {1}));
    if (!a.signal_out.empty()) write_json_file(a.signal_out, coefficients_to_json(c));
  } else {
    throw ConfigError("measure needs --coefficients or --k");
  }
  c.check_matches(f);
  Eigen::MatrixXd y = measure(mat, f, c);
  if (a.noise > 0.0) {
    RandomStream rs(derive_seed(a.seed, {2}));
    Eigen::MatrixXd e = rs.normal_matrix(y.rows(), y.cols());
    y += a.noise * e / std::max(e.norm(), 1e-300);
  }
  write_json_file(a.out, dense_to_json(y));
  out << "wrote measurements " << y.rows() << "x" << y.cols() << " to " << a.out << "\n";
  return kExitOk;
}

int run_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const MeasurementMatrix mat = load_matrix_noted(a.matrix, a.renormalize, err);
  const FusionFrame f = load_frame(a.frame);
  const Eigen::MatrixXd y = load_dense(a.measurements);
  SolverOptions opts;
  opts.feasibility_tol = a.tol;
  opts.max_iterations = a.max_iters;
  SolveReport r;
  if (a.method == "p1") r = solve_p1_noisy(mat, f, y, a.eta, opts);
  else if (a.method == "p0") r = solve_p0_bruteforce(mat, f, y, a.kmax, opts);
  else throw ConfigError("unknown method '" + a.method + "'");
  const json rep = report_to_json(r);
  out << rep.dump(2) << "\n";
  if (!a.report.empty()) write_json_file(a.report, rep);
  if (!a.out.empty() && r.coefficients.size() == f.size())
    write_json_file(a.out, coefficients_to_json(r.coefficients));
  switch (r.status) {
    case SolveStatus::Converged: return kExitOk;
    case SolveStatus::MaxIterations: return kExitMaxIters;
    case SolveStatus::Infeasible: return kExitInfeasible;
  }
  return kExitOk;
}

int run_certify(const CertifyArgs& a, std::ostream& out, std::ostream& err) {
  const MeasurementMatrix mat = load_matrix_noted(a.matrix, a.renormalize, err);
  const FusionFrame f = load_frame(a.frame);
  check_compatible(mat, f);
  auto row = [&](const std::string& k, const std::string& v) {
    out << std::left << std::setw(22) << k << v << "\n";
  };
  const double mu = mat.cols() >= 2 ? coherence(mat) : 0.0;
  const double muf = mat.cols() >= 2 ? fusion_coherence(mat, f) : 0.0;
  row("mu", num(mu));
  row("mu_f", num(muf));
  const std::size_t kc = coherence_recovery_bound(muf);
  row("coherence_kmax", kc == kUnboundedSparsity ? "inf" : std::to_string(kc));
  std::vector<double> deltas{0.0};
  const std::size_t kmax = std::min<std::size_t>(a.kmax, f.size());
  for (std::size_t k = 1; k <= kmax; ++k) {
    deltas.push_back(frip_constant(mat, f, k, a.threads).delta_k);
    row("delta_" + std::to_string(k), num(deltas.back()));
  }
  for (std::size_t k = 1; 2 * k <= kmax; ++k) {
    const FripFlags fl = frip_recovery_checks(deltas[2 * k]);
    row("k=" + std::to_string(k) + " exact_ok", fl.exact_ok ? "yes" : "no");
    row("k=" + std::to_string(k) + " noisy_ok", fl.noisy_ok ? "yes" : "no");
  }
  std::optional<BlockCoefficients> c;
  std::optional<SupportSet> s;
  if (!a.signal.empty()) {
    c = load_coefficients(a.signal);
    c->check_matches(f);
    s = c->support();
  } else if (!a.support.empty()) {
    s = SupportSet(a.support);
  }
  if (s) {
    s->check_range(f.size());
    double alpha = std::nan("");
    try {
      alpha = alpha_of_support(mat, *s);
    } catch (const SingularityError&) {
    }
    const double theta = s->empty() ? 1.0 : theta_of_support(f, *s);
    row("alpha", num(alpha));
    row("theta", num(theta));
    if (c) {
      try {
        const CertificateResult cr = dual_certificate_check(mat, f, *c);
        row("certificate_margin", num(cr.margin));
        row("certificate", cr.passed ? "passed" : "failed");
      } catch (const SingularityError&) {
        row("certificate", "singular");
      }
    }
    if (f.common_dim() > 0 && f.unit_weights() && !std::isnan(alpha) && s->size() < f.size()) {
      const Theorem4Bound b = theorem4_failure_bound(alpha, std::max(theta, 1.0),
                                                     static_cast<double>(f.common_dim()),
                                                     f.size(), s->size());
      row("thm4_bound", num(b.bound) + (b.degenerate ? " (degenerate)" : ""));
    }
  }
  return kExitOk;
}

int run_phase(const ExperimentArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = experiment_config(a);
  const PhaseDiagramResult r = run_phase_diagram(cfg);
  write_text_file(cfg.output, trials_csv(r.records));
  write_text_file(summary_path(cfg.output), summary_csv(r.cells));
  out << summary_csv(r.cells);
  return kExitOk;
}

int run_compare(const ExperimentArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = experiment_config(a);
  const PhaseDiagramResult r = run_phase_diagram(cfg);
  const auto rows = compare_bound_vs_empirical(cfg, r);
  write_text_file(cfg.output, bound_csv(rows));
  out << bound_csv(rows);
  for (const auto& row : rows)
    if (!row.dominates) throw CheckFailed{};
  return kExitOk;
}

int run_lemmas(const LemmaArgs& a, std::ostream& out) {
  LemmaBatteryConfig c;
  if (!a.config.empty()) c = lemma_config_from_json(read_json_file(a.config));
  if (a.M) c.M = *a.M;
  if (a.m) c.m = *a.m;
  if (a.N) c.N = *a.N;
  if (a.k) c.k = *a.k;
  if (a.draws) c.draws = *a.draws;
  if (a.mc_draws) c.mc_draws = *a.mc_draws;
  if (a.samples) c.samples = *a.samples;
  if (a.seed) c.seed = *a.seed;
  if (a.threads) c.threads = *a.threads;
  if (!a.construction.empty()) {
    json j = {{"construction", a.construction}};
    c.construction = lemma_config_from_json(j).construction;
  }
  if (a.self_test) c.lipschitz_bound_scale = 0.5;
  const LemmaBatteryReport r = run_lemma_battery(c);
  const json j = lemma_report_to_json(r);
  if (!a.out.empty()) write_json_file(a.out, j);
  out << j.dump(2) << "\n";
  if (!r.all_passed) throw CheckFailed{};
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fusion frame sparse recovery toolkit", "ffcs"};
  app.set_version_flag("--version", std::string("ffcs ") + kVersion);
  app.require_subcommand(1);

  GenFrameArgs gf;
  auto* s_gf = app.add_subcommand("gen-frame", "Write a random fusion frame");
  s_gf->add_option("--M", gf.M, "Ambient dimension")->required();
  s_gf->add_option("--N", gf.N, "Number of subspaces");
  s_gf->add_option("--m", gf.m, "Common subspace dimension");
  s_gf->add_option("--dims", gf.dims, "Per-subspace dimensions");
  s_gf->add_option("--seed", gf.seed, "Seed");
  s_gf->add_option("--out", gf.out, "Output file")->required();

  GenMatrixArgs gm;
  auto* s_gm = app.add_subcommand("gen-matrix", "Write a measurement matrix");
  s_gm->add_option("--n", gm.n, "Rows")->required();
  s_gm->add_option("--N", gm.N, "Columns");
  s_gm->add_option("--seed", gm.seed, "Seed");
  s_gm->add_option("--kind", gm.kind, "gaussian | identity_hadamard");
  s_gm->add_option("--out", gm.out, "Output file")->required();

  MeasureArgs me;
  auto* s_me = app.add_subcommand("measure", "Compute Y = A U(c)");
  s_me->add_option("--matrix", me.matrix, "Matrix file")->required();
  s_me->add_option("--frame", me.frame, "Frame file")->required();
  s_me->add_option("--coefficients", me.coefficients, "Coefficient file");
  auto* k_opt = s_me->add_option("--k", me.k, "Plant a random k-sparse signal instead");
  s_me->add_option("--signal-out", me.signal_out, "Where to write the planted signal");
  s_me->add_option("--seed", me.seed, "Seed for the planted signal and noise");
  s_me->add_option("--noise", me.noise, "Frobenius norm of added Gaussian noise");
  s_me->add_option("--renormalize-columns", me.renormalize,
                  "Rescale non-unit matrix columns with a warning (false: reject)");
  s_me->add_option("--out", me.out, "Output file")->required();

  SolveArgs so;
  auto* s_so = app.add_subcommand("solve", "Recover coefficients from measurements");
  s_so->add_option("--matrix", so.matrix, "Matrix file")->required();
  s_so->add_option("--frame", so.frame, "Frame file")->required();
  s_so->add_option("--measurements", so.measurements, "Measurement file")->required();
  s_so->add_option("--eta", so.eta, "Noise level (0 = equality constraint)");
  s_so->add_option("--tol", so.tol, "Feasibility tolerance");
  s_so->add_option("--max-iters", so.max_iters, "Iteration limit");
  s_so->add_option("--method", so.method, "p1 | p0");
  s_so->add_option("--kmax", so.kmax, "Largest support size for p0");
  s_so->add_option("--out", so.out, "Coefficient output file");
  s_so->add_option("--report", so.report, "Report output file");
  s_so->add_option("--renormalize-columns", so.renormalize,
                  "Rescale non-unit matrix columns with a warning (false: reject)");

  CertifyArgs ce;
  auto* s_ce = app.add_subcommand("certify", "Print recovery guarantees for an instance");
  s_ce->add_option("--matrix", ce.matrix, "Matrix file")->required();
  s_ce->add_option("--frame", ce.frame, "Frame file")->required();
  s_ce->add_option("--kmax", ce.kmax, "Largest k for the fusion RIP constant");
  s_ce->add_option("--support", ce.support, "Support indices (0-based)");
  s_ce->add_option("--signal", ce.signal, "Coefficient file (gives support and signs)");
  s_ce->add_option("--threads", ce.threads, "Worker threads");
  s_ce->add_option("--renormalize-columns", ce.renormalize,
                  "Rescale non-unit matrix columns with a warning (false: reject)");

  ExperimentArgs ph;
  auto* s_ph = app.add_subcommand("phase-diagram", "Monte Carlo recovery sweep");
  add_experiment_options(s_ph, ph);
  ExperimentArgs cb;
  auto* s_cb = app.add_subcommand("compare-bound", "Empirical failure rate against the bound");
  add_experiment_options(s_cb, cb);

  LemmaArgs le;
  auto* s_le = app.add_subcommand("lemma-battery", "Check the Lipschitz and concentration lemmas");
  s_le->add_option("--config", le.config, "Battery config file");
  s_le->add_option("--out", le.out, "Report output file");
  s_le->add_option("--M", le.M, "Ambient dimension");
  s_le->add_option("--m", le.m, "Subspace dimension");
  s_le->add_option("--N", le.N, "Number of subspaces");
  s_le->add_option("--k", le.k, "Support size");
  s_le->add_option("--draws", le.draws, "Draws for the operator-norm bound");
  s_le->add_option("--mc-draws", le.mc_draws, "Draws with Monte Carlo checks");
  s_le->add_option("--samples", le.samples, "Monte Carlo samples per draw");
  s_le->add_option("--seed", le.seed, "Seed");
  s_le->add_option("--threads", le.threads, "Worker threads");
  s_le->add_option("--construction", le.construction, "random | orthogonal | identical");
  s_le->add_flag("--self-test", le.self_test, "Halve the Lipschitz bound; checks must fail");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "ffcs " << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  }
  me.k_set = k_opt->count() > 0;

  try {
    if (s_gf->parsed()) return run_gen_frame(gf, out);
    if (s_gm->parsed()) return run_gen_matrix(gm, out);
    if (s_me->parsed()) return run_measure(me, out, err);
    if (s_so->parsed()) return run_solve(so, out, err);
    if (s_ce->parsed()) return run_certify(ce, out, err);
    if (s_ph->parsed()) return run_phase(ph, out);
    if (s_cb->parsed()) return run_compare(cb, out);
    if (s_le->parsed()) return run_lemmas(le, out);
  } catch (const CheckFailed&) {
    err << "error: check_failed: at least one check did not pass\n";
    return kExitCheckFailed;
  } catch (const ConfigError& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  err << "error: usage: no subcommand\n";
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace ffcs
