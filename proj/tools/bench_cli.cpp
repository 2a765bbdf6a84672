// Command-line harness around the library: field simulation, single-field
// estimation, prediction tables, Monte Carlo experiment reproduction, and
// the verification battery.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure,
// 4 verification failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfqv/acceptance.hpp"
#include "rfqv/config.hpp"
#include "rfqv/csvio.hpp"
#include "rfqv/estimate.hpp"
#include "rfqv/experiment.hpp"
#include "rfqv/fieldsim.hpp"
#include "rfqv/rng.hpp"

namespace {

using namespace rfqv;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Sampler ids stored in the binary field header.
enum SamplerId : std::uint64_t {
  kAnchored0 = 0,
  kAnchored1 = 1,
  kFiltered = 2,
  kTorus = 3,
  kMatern = 4,
};

TrimMode parse_trim(const std::string& s) {
  if (s == "common") return TrimMode::common;
  if (s == "per_step") return TrimMode::per_step;
  throw ConfigError("unknown trim mode '" + s + "' (common, per_step)");
}

PredictionKind parse_kind(const std::string& s) {
  if (s == "finite" || s == "finite-lattice") return PredictionKind::finite_window;
  if (s == "torus") return PredictionKind::torus;
  if (s == "asymptotic") return PredictionKind::asymptotic;
  throw ConfigError("unknown prediction kind '" + s + "' (finite, torus, asymptotic)");
}

void check_format(const std::string& format) {
  if (format != "csv" && format != "txt")
    throw ConfigError("unknown format '" + format + "' (csv, txt)");
}

std::string out_path(const std::string& dir, const std::string& stem, const std::string& ext) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / (stem + "." + ext)).string();
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  int n = 60;
  std::string model = "power_law";
  double phi1 = 1.0, phi2 = 0.5;
  double nu = 0.5, sigma2 = 1.0, rho = 1.0;
  std::string sampler = "anchored";
  int irf_order = 0;
  int m = 1;
  std::uint64_t rep = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string out = ".";
  std::string format = "csv";
  bool binary = false;
};

int run_simulate(const SimulateArgs& a) {
  check_format(a.format);
  ModelSpec model;
  if (a.model == "power_law") {
    model = ModelSpec::power_law({a.phi1, a.phi2});
  } else if (a.model == "matern") {
    model = ModelSpec::matern({a.sigma2, a.rho, a.nu});
  } else {
    throw ConfigError("unknown model '" + a.model + "' (power_law, matern)");
  }

  Rng rng = Rng::from(a.seed, kStreamValues, a.rep);
  FieldFile f;
  f.m = static_cast<std::uint64_t>(a.m);
  f.seed = a.seed;
  if (a.sampler == "anchored") {
    if (model.kind == ModelSpec::Kind::matern) {
      const GaussianSampler gs(
          locations_cov_matrix(unit_lattice_locations(a.n, 1.0), model.mat));
      f.grid = vector_to_grid(gs.draw(rng), a.n);
      f.mode = kMatern;
    } else {
      const AnchoredSampler s(a.n, model.pl, a.irf_order);
      f.grid = s.draw(rng);
      f.mode = a.irf_order == 0 ? kAnchored0 : kAnchored1;
    }
  } else if (a.sampler == "filtered") {
    const GaussianSampler gs(filtered_cov_matrix(a.n, a.m, model));
    f.grid = vector_to_grid(gs.draw(rng), a.n - a.m);
    f.mode = kFiltered;
  } else if (a.sampler == "torus") {
    const GaussianSampler gs(torus_filtered_cov_matrix(a.n, a.m, model));
    f.grid = vector_to_grid(gs.draw(rng), a.n);
    f.mode = kTorus;
  } else {
    throw ConfigError("unknown sampler '" + a.sampler + "' (anchored, filtered, torus)");
  }

  std::string path;
  if (a.binary) {
    path = out_path(a.out, "field", "rsf1");
    write_rsf1(path, f);
  } else if (a.format == "csv") {
    path = out_path(a.out, "field", "csv");
    write_field_csv(path, f.grid);
  } else {
    throw ConfigError("field output supports --format csv or --binary");
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

// --- estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  std::vector<std::string> estimators = {"bilinear"};
  int m = 1;
  std::string trim = "common";
  std::string format = "txt";
  std::string out;
};

Grid load_field(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("input field '" + path + "' not found");
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".rsf1") return read_rsf1(path).grid;
  return read_field_csv(path);
}

int run_estimate(const EstimateArgs& a) {
  check_format(a.format);
  const Grid x = load_field(a.input);
  const TrimMode trim = parse_trim(a.trim);

  Table t;
  t.columns = {"estimator", "m", "phi1_hat", "phi2_hat", "out_of_domain", "q1", "q2"};
  auto add = [&](const std::string& name, int m, std::optional<double> p1, double p2, bool ood,
                 double q1, double q2) {
    auto& row = t.add_row();
    row[0] = name;
    row[1] = format_long(m);
    row[2] = format_double(p1 ? *p1 : kNan);
    row[3] = format_double(p2);
    row[4] = format_long(ood ? 1 : 0);
    row[5] = format_double(q1);
    row[6] = format_double(q2);
  };

  std::vector<std::string> wanted = a.estimators;
  if (wanted.size() == 1 && wanted[0] == "all") wanted = {"bilinear", "laplacian", "whittle", "reml"};
  for (const std::string& e : wanted) {
    if (e == "bilinear") {
      const MomEstimate est = mom_estimate(x, a.m, trim);
      add(e, a.m, est.phi1_hat, est.phi2_hat, est.out_of_domain, est.qv.q1, est.qv.q2);
    } else if (e == "laplacian") {
      const MomEstimate est = laplacian_estimate(x);
      add(e, 1, est.phi1_hat, est.phi2_hat, est.out_of_domain, est.qv.q1, est.qv.q2);
    } else if (e == "whittle") {
      WhittleOptions opt;
      opt.m = a.m;
      const WhittleFit fit = whittle_estimate(x, opt);
      add(e, a.m, fit.phi1_hat, fit.phi2_hat, false, kNan, kNan);
    } else if (e == "reml") {
      RemlOptions opt;
      opt.m = a.m;
      const RemlFit fit = reml_estimate(x, opt);
      add(e, a.m, fit.phi1_hat, fit.phi2_hat, false, kNan, kNan);
    } else {
      throw ConfigError("unknown estimator '" + e + "' (bilinear, laplacian, whittle, reml, all)");
    }
  }

  if (a.out.empty()) {
    std::cout << table_to_string(t, a.format);
  } else {
    const std::string path = out_path(a.out, "estimate", a.format);
    write_table(path, t, a.format);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

// --- theory -----------------------------------------------------------------

struct TheoryArgs {
  std::vector<int> ns = {30, 40, 50, 60};
  std::vector<double> phi2s = {0.5, 0.8};
  double phi1 = 1.0;
  int m = 1;
  std::string kind = "finite";
  std::string trim = "common";
  std::string format = "txt";
  std::string out;
};

int run_theory(const TheoryArgs& a) {
  check_format(a.format);
  const Table t = theory_table(a.ns, a.phi2s, a.phi1, a.m, parse_trim(a.trim), parse_kind(a.kind));
  if (a.out.empty()) {
    std::cout << table_to_string(t, a.format);
  } else {
    const std::string path = out_path(a.out, "theory", a.format);
    write_table(path, t, a.format);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

// --- experiment ---------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::string experiment;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out = "out";
  std::string format = "csv";
};

int run_experiment_cmd(const ExperimentArgs& a) {
  check_format(a.format);
  Config cfg = a.config.empty() ? Config() : Config::parse_file(a.config);
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!a.experiment.empty()) cfg.set("experiment", a.experiment);
  if (a.seed) cfg.set("seed", std::to_string(*a.seed));
  if (a.threads) cfg.set("threads", std::to_string(*a.threads));
  run_experiment_files(cfg, a.out, a.format, std::cout);
  return 0;
}

// --- verify -------------------------------------------------------------------

struct VerifyArgs {
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  bool fast = false;
};

int run_verify(const VerifyArgs& a) {
  AcceptanceOptions opt;
  opt.seed = a.seed;
  opt.threads = a.threads;
  opt.heavy = !a.fast;
  const AcceptanceReport rep = run_acceptance(opt, std::cout);
  return rep.all_ran_passed ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-scale quadratic variation benchmark for planar Gaussian random fields"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Draw one field and write it to disk");
  c_sim->add_option("--n", sim.n, "lattice side");
  c_sim->add_option("--model", sim.model, "power_law or matern");
  c_sim->add_option("--phi1", sim.phi1, "power-law scale");
  c_sim->add_option("--phi2", sim.phi2, "power-law roughness");
  c_sim->add_option("--nu", sim.nu, "matern smoothness");
  c_sim->add_option("--sigma2", sim.sigma2, "matern variance");
  c_sim->add_option("--rho", sim.rho, "matern range");
  c_sim->add_option("--sampler", sim.sampler, "anchored, filtered, or torus");
  c_sim->add_option("--irf-order", sim.irf_order, "anchoring order (0 or 1)");
  c_sim->add_option("--m", sim.m, "filter order for filtered/torus samplers");
  c_sim->add_option("--rep", sim.rep, "replicate index within the seed stream");
  c_sim->add_option("--seed", sim.seed, "master seed");
  c_sim->add_option("--out", sim.out, "output directory");
  c_sim->add_option("--format", sim.format, "csv or txt");
  c_sim->add_flag("--binary", sim.binary, "write the binary field format instead");

  EstimateArgs est;
  CLI::App* c_est = app.add_subcommand("estimate", "Estimate parameters from a stored field");
  c_est->add_option("--input", est.input, "field file (.csv or .rsf1)")->required();
  c_est->add_option("--estimator", est.estimators,
                    "bilinear, laplacian, whittle, reml, or all (repeatable)");
  c_est->add_option("--m", est.m, "filter order");
  c_est->add_option("--trim", est.trim, "window convention: common or per_step");
  c_est->add_option("--format", est.format, "csv or txt");
  c_est->add_option("--out", est.out, "output directory (default: print to stdout)");

  TheoryArgs th;
  CLI::App* c_th = app.add_subcommand("theory", "Print covariance predictions for design cells");
  c_th->add_option("--n", th.ns, "lattice sides");
  c_th->add_option("--phi2", th.phi2s, "roughness values");
  c_th->add_option("--phi1", th.phi1, "scale parameter");
  c_th->add_option("--m", th.m, "filter order");
  c_th->add_option("--kind", th.kind, "finite, torus, or asymptotic");
  c_th->add_option("--trim", th.trim, "window convention: common or per_step");
  c_th->add_option("--format", th.format, "csv or txt");
  c_th->add_option("--out", th.out, "output directory (default: print to stdout)");

  ExperimentArgs exp;
  CLI::App* c_exp = app.add_subcommand("experiment", "Run a Monte Carlo design and write tables");
  c_exp->add_option("--config", exp.config, "key=value config file");
  c_exp->add_option("--experiment", exp.experiment,
                    "design name (table1, table2, table3, fig1, fig2, deletion, thinning, "
                    "jitter, matern, trimming, custom); overrides the config");
  c_exp->add_option("--set", exp.sets, "extra key=value overrides (repeatable)");
  c_exp->add_option("--seed", exp.seed, "master seed (overrides the config)");
  c_exp->add_option("--threads", exp.threads, "worker threads (overrides the config)");
  c_exp->add_option("--out", exp.out, "output directory");
  c_exp->add_option("--format", exp.format, "csv or txt");

  VerifyArgs ver;
  CLI::App* c_ver = app.add_subcommand("verify", "Run the verification battery");
  c_ver->add_option("--seed", ver.seed, "master seed");
  c_ver->add_option("--threads", ver.threads, "worker threads");
  c_ver->add_flag("--fast", ver.fast, "skip the heavy Monte Carlo criteria");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_est->parsed()) return run_estimate(est);
    if (c_th->parsed()) return run_theory(th);
    if (c_exp->parsed()) return run_experiment_cmd(exp);
    return run_verify(ver);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    // Parameter-domain violations are user input errors, not numeric failures.
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
