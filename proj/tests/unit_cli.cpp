#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "rfqv/config.hpp"
#include "rfqv/csvio.hpp"
#include "rfqv/estimate.hpp"
#include "rfqv/experiment.hpp"
#include "rfqv/fieldsim.hpp"
#include "rfqv/rng.hpp"

using namespace rfqv;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("rfqv_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> run_files(const Config& cfg, const fs::path& dir) {
  std::ostringstream progress;
  return run_experiment_files(cfg, dir.string(), "csv", progress);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RFQV_BENCH_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("experiment driver rewrites byte-identical outputs") {
  Config cfg;
  cfg.parse_text(
      "experiment = custom\n"
      "n = 16\n"
      "phi2 = 0.5\n"
      "reps = 8\n"
      "seed = 4242\n");
  const fs::path a = fresh_dir("rerun_a");
  const fs::path b = fresh_dir("rerun_b");
  const std::vector<std::string> fa = run_files(cfg, a);
  const std::vector<std::string> fb = run_files(cfg, b);
  REQUIRE(fa.size() == 1);
  REQUIRE(fb.size() == 1);
  CHECK(fs::path(fa[0]).filename() == fs::path(fb[0]).filename());
  CHECK(slurp(fa[0]) == slurp(fb[0]));
}

TEST_CASE("thread count does not change the written tables") {
  Config base;
  base.parse_text(
      "experiment = custom\n"
      "n = 16\n"
      "phi2 = 0.7\n"
      "reps = 9\n"
      "seed = 99\n");
  Config threaded = base;
  threaded.set("threads", "3");
  const fs::path a = fresh_dir("thr_1");
  const fs::path b = fresh_dir("thr_3");
  const std::vector<std::string> fa = run_files(base, a);
  const std::vector<std::string> fb = run_files(threaded, b);
  REQUIRE(fa.size() == 1);
  REQUIRE(fb.size() == 1);
  CHECK(slurp(fa[0]) == slurp(fb[0]));
}

TEST_CASE("design cells do not depend on the surrounding design") {
  Table1Spec wide;
  wide.ns = {16, 20};
  wide.phi2s = {0.5};
  wide.reps = 6;
  Table1Spec narrow = wide;
  narrow.ns = {20};
  const std::vector<Table1Cell> cw = run_table1(wide);
  const std::vector<Table1Cell> cn = run_table1(narrow);
  REQUIRE(cw.size() == 2);
  REQUIRE(cn.size() == 1);
  const Table1Cell& a = cw[1];
  const Table1Cell& b = cn[0];
  REQUIRE(a.n == 20);
  CHECK(a.mean_log_phi1 == b.mean_log_phi1);
  CHECK(a.mean_phi2 == b.mean_phi2);
  CHECK(a.sd_log_phi1_scaled == b.sd_log_phi1_scaled);
  CHECK(a.sd_phi2_scaled == b.sd_phi2_scaled);
  CHECK(a.corr == b.corr);
  CHECK(a.used == b.used);
}

TEST_CASE("the published seed stream reconstructs a table cell") {
  Table3Spec spec;
  spec.ns = {16};
  spec.phi2s = {0.4};
  spec.reps = 4;
  const std::vector<Table3Cell> cells = run_table3(spec);
  REQUIRE(cells.size() == 1);

  const AnchoredSampler sampler(16, {1.0, 0.4}, 0);
  const std::uint64_t key = cell_seed(spec.seed, 16, 0.4, EstimatorSet::four_way);
  std::vector<double> bil;
  for (long r = 0; r < spec.reps; ++r) {
    Rng rng = Rng::from(key, kStreamValues, static_cast<std::uint64_t>(r));
    const Grid x = sampler.draw(rng);
    const MomEstimate e = mom_estimate(x, 1, TrimMode::common);
    if (!e.out_of_domain && !e.degenerate) bil.push_back(e.phi2_hat);
  }
  REQUIRE(static_cast<long>(bil.size()) == cells[0].bilinear.used);
  CHECK(sample_stats(bil).mean == cells[0].bilinear.mean);
}

TEST_CASE("prediction listings carry the design kind tag") {
  const Table finite = theory_table({20}, {0.5}, 1.0, 1, TrimMode::common,
                                    PredictionKind::finite_window);
  const Table torus = theory_table({20}, {1.5}, 1.0, 2, TrimMode::common,
                                   PredictionKind::torus);
  const Table asym = theory_table({20}, {0.5}, 1.0, 1, TrimMode::common,
                                  PredictionKind::asymptotic);
  CHECK(table_to_string(finite, "csv").find("finite-lattice") != std::string::npos);
  CHECK(table_to_string(torus, "csv").find("torus") != std::string::npos);
  CHECK(table_to_string(asym, "csv").find("asymptotic") != std::string::npos);
}

TEST_CASE("command line reports the documented exit codes") {
  const fs::path dir = fresh_dir("exit_codes");
  const std::string field = (dir / "field.csv").string();

  CHECK(run_cli("simulate --n 18 --phi2 0.5 --seed 7 --out " + dir.string()) == 0);
  CHECK(fs::exists(field));
  CHECK(run_cli("estimate --input " + field + " --estimator bilinear") == 0);
  CHECK(run_cli("theory --n 16 --phi2 0.5 --kind asymptotic") == 0);

  CHECK(run_cli("simulate --n 16 --phi2 3.5") == 2);          // outside (0, 2)
  CHECK(run_cli("estimate --input " + (dir / "missing.csv").string()) == 2);
  CHECK(run_cli("experiment --experiment nosuch --out " + dir.string()) == 2);
  CHECK(run_cli("frobnicate") == 2);                          // unknown subcommand
}
