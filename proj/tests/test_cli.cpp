#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "ffcs/cli.hpp"
#include "ffcs/io.hpp"
#include "ffcs/solver.hpp"

using namespace ffcs;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto p = fs::temp_directory_path() / "ffcs_cli_test";
  fs::create_directories(p);
  return p;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("version, help and usage errors") {
  CHECK(run({"--version"}).out == "ffcs 1.0.0\n");
  const Run h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("phase-diagram") != std::string::npos);
  const Run u = run({"frobnicate"});
  CHECK(u.code == 64);
  CHECK(u.err.rfind("error: usage:", 0) == 0);
  CHECK(run({}).code == 64);
  CHECK(run({"solve", "--matrix", "a.json"}).code == 64);
  CHECK(run({"gen-frame", "--M", "x", "--out", path("f.json")}).code == 64);
}

TEST_CASE("generate, measure, solve, certify") {
  REQUIRE(run({"gen-frame", "--M", "3", "--N", "30", "--m", "2", "--seed", "1", "--out", path("frame.json")}).code == 0);
  REQUIRE(run({"gen-matrix", "--n", "10", "--N", "30", "--seed", "2", "--out", path("matrix.json")}).code == 0);
  const Run m = run({"measure", "--matrix", path("matrix.json"), "--frame", path("frame.json"), "--k", "2",
                     "--seed", "3", "--signal-out", path("signal.json"), "--out", path("y.json")});
  REQUIRE(m.code == 0);
  const Run s = run({"solve", "--matrix", path("matrix.json"), "--frame", path("frame.json"), "--measurements",
                     path("y.json"), "--out", path("chat.json"), "--report", path("report.json")});
  CHECK(s.code == 0);
  const auto rep = nlohmann::json::parse(s.out);
  CHECK(rep.at("status") == "converged");
  CHECK(recovered(load_coefficients(path("signal.json")), load_coefficients(path("chat.json"))));
  CHECK(read_json_file(path("report.json")) == rep);

  const Run c = run({"certify", "--matrix", path("matrix.json"), "--frame", path("frame.json"), "--kmax", "2",
                     "--signal", path("signal.json")});
  CHECK(c.code == 0);
  for (const char* key : {"mu ", "mu_f", "coherence_kmax", "delta_1", "delta_2", "k=1 exact_ok", "alpha",
                          "theta", "certificate", "thm4_bound"})
    CHECK(c.out.find(key) != std::string::npos);

  const Run it = run({"solve", "--matrix", path("matrix.json"), "--frame", path("frame.json"), "--measurements",
                      path("y.json"), "--method", "p0", "--kmax", "2"});
  CHECK(it.code == 0);
  CHECK(run({"solve", "--matrix", path("matrix.json"), "--frame", path("frame.json"), "--measurements",
             path("y.json"), "--method", "p2"}).code == 64);
}

TEST_CASE("solve exit codes") {
  REQUIRE(run({"gen-frame", "--M", "4", "--N", "3", "--m", "1", "--seed", "1", "--out", path("tf.json")}).code == 0);
  REQUIRE(run({"gen-matrix", "--n", "6", "--N", "3", "--seed", "2", "--out", path("tm.json")}).code == 0);
  nlohmann::json y = dense_to_json(Eigen::MatrixXd::Ones(6, 4));
  write_json_file(path("ty.json"), y);
  const Run r = run({"solve", "--matrix", path("tm.json"), "--frame", path("tf.json"), "--measurements", path("ty.json")});
  CHECK(r.code == 3);
  CHECK(nlohmann::json::parse(r.out).at("status") == "infeasible");
  CHECK(run({"solve", "--matrix", path("missing.json"), "--frame", path("tf.json"), "--measurements",
             path("ty.json")}).code == 1);
}

TEST_CASE("column renormalization") {
  write_json_file(path("raw.json"), nlohmann::json{{"rows", 2}, {"cols", 2}, {"entries", {3.0, 0.0, 4.0, 1.0}}});
  REQUIRE(run({"gen-frame", "--M", "2", "--N", "2", "--m", "1", "--seed", "1", "--out", path("f2.json")}).code == 0);
  const Run ok = run({"certify", "--matrix", path("raw.json"), "--frame", path("f2.json")});
  CHECK(ok.code == 0);
  CHECK(ok.err.find("warning") != std::string::npos);
  const Run strict = run({"certify", "--matrix", path("raw.json"), "--frame", path("f2.json"),
                          "--renormalize-columns", "false"});
  CHECK(strict.code != 0);
  CHECK(strict.err.rfind("error:", 0) == 0);
}

TEST_CASE("phase diagram and compare-bound") {
  const std::string out1 = path("pd1.csv"), out4 = path("pd4.csv");
  const std::vector<std::string> base{"phase-diagram", "--M", "4", "--N", "12", "--n", "6", "--m", "1", "2",
                                      "--k", "1", "2", "--trials", "4", "--seed", "9"};
  auto a = base;
  a.insert(a.end(), {"--out", out1, "--threads", "1"});
  auto b = base;
  b.insert(b.end(), {"--out", out4, "--threads", "4"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(out1) == slurp(out4));
  CHECK(slurp(out1).rfind("# schema=1\nm,k,n,trial", 0) == 0);
  CHECK(fs::exists(path("pd1_summary.csv")));

  const Run cb = run({"compare-bound", "--M", "16", "--N", "16", "--n", "8", "--m", "2", "--k", "2", "--trials",
                      "5", "--frame-source", "designed", "--matrix-source", "identity_hadamard", "--out",
                      path("cb.csv")});
  CHECK((cb.code == 0 || cb.code == 1));
  CHECK(cb.out.find("thm4_bound") != std::string::npos);
  CHECK(run({"phase-diagram", "--M", "4", "--N", "3", "--n", "2", "--m", "5", "--k", "1", "--out",
             path("x.csv")}).code == 64);
}

TEST_CASE("lemma battery") {
  const Run ok = run({"lemma-battery", "--draws", "20", "--mc-draws", "1", "--samples", "2000", "--seed", "1"});
  CHECK(ok.code == 0);
  const Run st = run({"lemma-battery", "--draws", "20", "--mc-draws", "1", "--samples", "2000", "--seed", "1",
                      "--construction", "orthogonal", "--self-test"});
  CHECK(st.code == 1);
  CHECK(st.err.find("check_failed") != std::string::npos);
}

TEST_CASE("installed binary") {
  const char* bin = std::getenv("FFCS_BIN");
  if (!bin) return;
  const std::string cmd = std::string(bin) + " --version > " + path("ver.txt");
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(slurp(path("ver.txt")) == "ffcs 1.0.0\n");
  CHECK(WEXITSTATUS(std::system((std::string(bin) + " nonsense 2>/dev/null").c_str())) == 64);
}
