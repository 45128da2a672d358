// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "ffcs/errors.hpp"
#include "ffcs/experiments.hpp"
#include "ffcs/guarantees.hpp"
#include "ffcs/io.hpp"
#include "ffcs/solver.hpp"

using namespace ffcs;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const std::string kConfigs = std::string(FFCS_SOURCE_DIR) + "/configs/";

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<Index> random_dims(std::size_t N, Index lo, Index hi, Seed seed) {
  RandomStream rs(seed);
  std::vector<Index> d(N);
  for (auto& x : d) x = lo + static_cast<Index>(rs.below(static_cast<std::uint64_t>(hi - lo + 1)));
  return d;
}

double rel_err(const BlockCoefficients& ref, const BlockCoefficients& x) {
  const double den = ref.concatenated().norm();
  const double num = (x.concatenated() - ref.concatenated()).norm();
  return den > 0 ? num / den : num;
}

// Coherence-certified instances: P1 recovers, P0 finds the same support.
Outcome criterion1() {
  int p1_ok = 0, p0_ok = 0, done = 0;
  for (std::uint64_t s = 0; done < 100; ++s) {
    const Seed seed = derive_seed(1001, {s});
    const MeasurementMatrix a = random_measurement_matrix(20, 24, derive_seed(seed, {1}));
    const FusionFrame f = random_fusion_frame(16, random_dims(24, 1, 3, derive_seed(seed, {2})),
                                              derive_seed(seed, {3}));
    const std::size_t kc = coherence_recovery_bound(fusion_coherence(a, f));
    if (kc == 0) continue;
    const std::size_t k = std::min<std::size_t>(kc, 3);
    const BlockCoefficients c =
        random_gaussian_signal(f, random_support(24, k, derive_seed(seed, {4})), derive_seed(seed, {5}));
    const MatrixXd y = measure(a, f, c);
    const SolveReport p1 = solve_p1(a, f, y);
    const SolveReport p0 = solve_p0_bruteforce(a, f, y, k);
    p1_ok += p1.status == SolveStatus::Converged && rel_err(c, p1.coefficients) <= 1e-4;
    p0_ok += p0.status == SolveStatus::Converged && p0.coefficients.support() == c.support();
    ++done;
  }
  return {p1_ok == 100 && p0_ok == 100, fmt("P1 %g/100, P0 support %g/100", p1_ok, p0_ok)};
}

Outcome criterion2() {
  int agree = 0, done = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; done < 50; ++s) {
    const Seed seed = derive_seed(2002, {s});
    RandomStream rs(seed);
    const std::size_t N = 4 + rs.below(5);
    const Index M = 2 + static_cast<Index>(rs.below(3));
    const Index n = 2 + static_cast<Index>(rs.below(3));
    const MeasurementMatrix a = random_measurement_matrix(n, static_cast<Index>(N), derive_seed(seed, {1}));
    const FusionFrame f = random_fusion_frame(M, random_dims(N, 1, 2, derive_seed(seed, {2})),
                                              derive_seed(seed, {3}));
    const std::size_t kc = coherence_recovery_bound(fusion_coherence(a, f));
    if (kc == 0) continue;
    const std::size_t k = std::min<std::size_t>(kc, 2);
    const BlockCoefficients c =
        random_gaussian_signal(f, random_support(N, k, derive_seed(seed, {4})), derive_seed(seed, {5}));
    const MatrixXd y = measure(a, f, c);
    const SolveReport p1 = solve_p1(a, f, y);
    const SolveReport p0 = solve_p0_bruteforce(a, f, y, k);
    const double d = rel_err(p0.coefficients, p1.coefficients);
    worst = std::max(worst, d);
    agree += p1.status == SolveStatus::Converged && p0.status == SolveStatus::Converged && d <= 1e-6;
    ++done;
  }
  return {agree == 50, fmt("%g/50 agree, worst relative difference %.2e", agree, worst)};
}

Outcome criterion3() {
  int certified = 0, counter = 0, singular = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Seed seed = derive_seed(3003, {s});
    const MeasurementMatrix a = random_measurement_matrix(24, 48, derive_seed(seed, {1}));
    const FusionFrame f = random_fusion_frame(16, std::vector<Index>(48, 2), derive_seed(seed, {2}));
    const std::size_t k = 1 + s % 4;
    const BlockCoefficients c =
        random_gaussian_signal(f, random_support(48, k, derive_seed(seed, {3})), derive_seed(seed, {4}));
    CertificateResult cr;
    try {
      cr = dual_certificate_check(a, f, c);
    } catch (const SingularityError&) {
      ++singular;
      continue;
    }
    if (!(cr.margin > 0)) continue;
    ++certified;
    const SolveReport r = solve_p1(a, f, measure(a, f, c));
    if (!(r.status == SolveStatus::Converged && recovered(c, r.coefficients))) ++counter;
  }
  return {counter == 0 && certified > 0,
          fmt("%g certified of 200, %g counterexamples, %g singular", certified, counter, singular)};
}

Outcome criterion4() {
  double worst_m1 = 0.0, worst_dom = -1.0;
  bool band = true;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const MeasurementMatrix a = random_measurement_matrix(8, 12, derive_seed(4004, {s}));
    std::vector<SubspaceBasis> ones(12, SubspaceBasis(MatrixXd::Ones(1, 1)));
    const FusionFrame f(ones);
    for (std::size_t k = 1; k <= 3; ++k)
      worst_m1 = std::max(worst_m1, std::abs(frip_constant(a, f, k).delta_k - classical_rip_constant(a, k)));
  }
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Seed seed = derive_seed(4005, {s});
    const MeasurementMatrix a = random_measurement_matrix(8, 10, derive_seed(seed, {1}));
    const FusionFrame f = random_fusion_frame(4, std::vector<Index>(10, 2), derive_seed(seed, {2}));
    const FripResult fr = frip_constant(a, f, 2);
    worst_dom = std::max(worst_dom, fr.delta_k - classical_rip_constant(a, 2));
    if (s == 0) {
      const MatrixXd au = build_block_operator(a, f, BlockOperatorKind::Basis).matrix;
      RandomStream rs(derive_seed(seed, {3}));
      for (int t = 0; t < 10000; ++t) {
        const SupportSet sp = random_support(10, 2, rs.next_u64());
        const VectorXd z = random_gaussian_signal(f, sp, rs.next_u64()).concatenated();
        const double q = (au * z).squaredNorm() / z.squaredNorm();
        band = band && std::abs(q - 1.0) <= fr.delta_k + 1e-10;
      }
    }
  }
  return {worst_m1 <= 1e-10 && worst_dom <= 1e-10 && band,
          fmt("M=1 max |delta - rip| %.1e, max delta_k - rip_k %.3f, band ", worst_m1, worst_dom) +
              (band ? "held" : "violated")};
}

Outcome criterion5() {
  const FripFlags a = frip_recovery_checks(0.30), b = frip_recovery_checks(0.40), c = frip_recovery_checks(0.50);
  const bool ok = a.exact_ok && a.noisy_ok && !b.exact_ok && b.noisy_ok && !c.exact_ok && !c.noisy_ok &&
                  !frip_recovery_checks(1.0 / 3.0).exact_ok &&
                  frip_recovery_checks(std::nextafter(1.0 / 3.0, 0.0)).exact_ok &&
                  !frip_recovery_checks(std::sqrt(2.0) - 1.0).noisy_ok &&
                  frip_recovery_checks(std::nextafter(std::sqrt(2.0) - 1.0, 0.0)).noisy_ok;
  return {ok, "thresholds 1/3 and sqrt(2)-1 at probes 0.30/0.40/0.50"};
}

Outcome criterion6() {
  LemmaBatteryConfig c = lemma_config_from_json(read_json_file(kConfigs + "lemma_battery.json"));
  const LemmaBatteryReport r = run_lemma_battery(c);
  c.construction = LemmaConstruction::Orthogonal;
  c.mc_draws = 1;
  const LemmaBatteryReport o = run_lemma_battery(c);
  c.construction = LemmaConstruction::Identical;
  const LemmaBatteryReport i = run_lemma_battery(c);
  bool tails = true;
  for (const auto& m : r.mc)
    for (const auto& t : m.tails) tails = tails && t.passed;
  const bool ok = r.all_passed && r.lemma4_failures == 0 && r.lemma4_checked == 1000 && r.mc.size() == 3 &&
                  c.samples == 100000 &&
                  o.lemma4_tight == o.lemma4_checked && i.lemma4_tight == i.lemma4_checked && o.all_passed &&
                  i.all_passed && tails;
  return {ok, fmt("%g/1000 operator-norm failures, worst L/bound %.6f, tight %g", r.lemma4_failures,
                  r.worst_lemma4_ratio, o.lemma4_tight + i.lemma4_tight) +
                  fmt(" of %g equality draws, %g Monte Carlo draws at 1e5 samples", o.lemma4_checked + i.lemma4_checked,
                      static_cast<double>(r.mc.size()))};
}

Outcome criterion7(const std::string& tmp) {
  ExperimentConfig cfg = load_config(kConfigs + "designed_family.json");
  cfg.output = tmp + "/designed.csv";
  cfg.validate();
  const PhaseDiagramResult run = run_phase_diagram(cfg);
  const auto rows = compare_bound_vs_empirical(cfg, run);
  bool ok = rows.size() == 4;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BoundRow& r = rows[i];
    ok = ok && r.dominates && r.alpha_max <= 0.6 && r.theta_max <= 1.5 && r.excluded == 0;
    if (i > 0) {
      const BoundRow& p = rows[i - 1];
      ok = ok && (r.empirical_failure <= p.empirical_failure || r.ci_low <= p.ci_high);
    }
    detail += fmt("m=%g fail=%.3f bound=%.3g ", static_cast<double>(r.m), r.empirical_failure, r.thm4_bound);
  }
  return {ok, detail};
}

Outcome criterion8(const std::string& tmp) {
  ExperimentConfig orth = load_config(kConfigs + "identical_columns/orthogonal.json");
  ExperimentConfig same = load_config(kConfigs + "identical_columns/identical.json");
  orth.output = tmp + "/orth.csv";
  same.output = tmp + "/same.csv";
  orth.validate();
  same.validate();
  const double mu = coherence(load_matrix(orth.matrix_file));
  const CellSummary a = run_phase_diagram(orth).cells.at(0);
  const CellSummary b = run_phase_diagram(same).cells.at(0);
  const bool ok = std::abs(mu - 1.0) <= 1e-12 && a.trials == 100 && a.recovered == 100 && b.trials == 100 &&
                  b.failed >= 99;
  return {ok, fmt("mu(A)=%.6f, orthogonal recovered %g/100, identical failed %g/100", mu, a.recovered, b.failed)};
}

Outcome criterion9(const std::string& tmp) {
  const std::string serial = tmp + "/serial.csv", parallel = tmp + "/parallel.csv";
  auto write = [](ExperimentConfig c, const std::string& out, unsigned threads) {
    c.output = out;
    c.threads = threads;
    const PhaseDiagramResult r = run_phase_diagram(c);
    write_text_file(out, trials_csv(r.records));
    write_text_file(summary_path(out), summary_csv(r.cells));
  };
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  bool ok = true;
  std::size_t bytes = 0;
  for (const char* name : {"phase_small.json", "identical_columns/orthogonal.json"}) {
    const ExperimentConfig c = load_config(kConfigs + name);
    write(c, serial, 1);
    write(c, parallel, 4);
    const std::string s = slurp(serial);
    ok = ok && !s.empty() && s == slurp(parallel) &&
         slurp(summary_path(serial)) == slurp(summary_path(parallel));
    write(c, parallel, 1);
    ok = ok && s == slurp(parallel);
    bytes += s.size();
  }
  return {ok, fmt("%g CSV bytes compared, serial vs 4 threads and rerun", static_cast<double>(bytes))};
}

}  // namespace

int main() {
  const auto tmp = std::filesystem::temp_directory_path() / "ffcs_acceptance";
  std::filesystem::create_directories(tmp);
  const std::string t = tmp.string();
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, [&] { return criterion7(t); }},
      {8, [&] { return criterion8(t); }},
      {9, [&] { return criterion9(t); }},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
