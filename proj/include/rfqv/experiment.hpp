#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfqv/asymptotics.hpp"
#include "rfqv/config.hpp"
#include "rfqv/csvio.hpp"
#include "rfqv/estimate.hpp"
#include "rfqv/fieldsim.hpp"
#include "rfqv/robustkit.hpp"

namespace rfqv {

// Published master seed for the shipped experiment designs.
inline constexpr std::uint64_t kDefaultSeed = 20210527;

// Estimator-set ids entering per-cell seed derivation. Cells with equal
// (master, n, parameter, set) share field draws; everything else is
// independent. fig2 deliberately shares mom_irf0 so its scatter is the
// corresponding mom cell's replicates.
enum class EstimatorSet : std::uint64_t {
  mom_irf0 = 1,
  mom_torus = 2,
  four_way = 3,
  variogram = 4,
  deletion = 5,
  thinning = 6,
  jitter = 7,
  misspec = 8,
};

std::uint64_t cell_seed(std::uint64_t master, int n, double param, EstimatorSet set);

// Runs fn(0..items-1) on up to n_threads workers. Callers write results into
// per-index slots and reduce sequentially afterwards, so the output is
// independent of the thread count. Rethrows the first worker exception.
void parallel_for(int n_threads, long items, const std::function<void(long)>& fn);

// Two-pass moments / least squares, fixed summation order.
struct SampleStats {
  long count = 0;
  double mean = 0.0;
  double sd = 0.0;
};
SampleStats sample_stats(const std::vector<double>& v);
double sample_cov(const std::vector<double>& a, const std::vector<double>& b);
double sample_corr(const std::vector<double>& a, const std::vector<double>& b);
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// --- mom estimator on power-law fields (sqrt(M)-scaled columns) ------------

struct Table1Spec {
  std::vector<int> ns = {30, 40, 50, 60};
  std::vector<double> phi2s = {0.5, 0.8};
  double phi1 = 1.0;
  int m = 1;
  int reps = 400;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
};

struct Table1Cell {
  int n = 0;
  int m = 1;
  double phi1 = 1.0;
  double phi2 = 0.0;
  long reps = 0;
  long used = 0;           // replicates with an admissible (phi1, phi2) pair
  long out_of_domain = 0;
  bool ok = false;         // error rate <= 1%
  double mean_log_phi1 = 0.0;
  double mean_phi2 = 0.0;
  double sd_log_phi1_scaled = 0.0;  // sqrt(M) sd over replicates
  double sd_phi2_scaled = 0.0;
  double corr = 0.0;
  double se_mean_log_phi1 = 0.0;    // MC standard errors (unscaled means)
  double se_mean_phi2 = 0.0;
  double se_sd_log_phi1_scaled = 0.0;
  double se_sd_phi2_scaled = 0.0;
  double th_sd_log_phi1 = 0.0;      // finite-lattice predictions
  double th_sd_phi2 = 0.0;
  double th_corr = 0.0;
  double scale = 0.0;               // M = (n-2m)^2
};

std::vector<Table1Cell> run_table1(const Table1Spec& spec);
Table table1_table(const std::vector<Table1Cell>& cells);

// --- mom estimator on the stationary periodic filtered field ---------------

struct Table2Spec {
  std::vector<int> ns = {30, 35, 40, 45, 50, 60};
  std::vector<double> phi2s = {1.2, 1.5, 1.8};
  double phi1 = 1.0;
  int m = 2;
  int reps = 400;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
};

struct Table2Cell {
  int n = 0;
  int m = 2;
  double phi1 = 1.0;
  double phi2 = 0.0;
  long reps = 0;
  long used = 0;
  long out_of_domain = 0;
  bool ok = false;
  double mean_phi2 = 0.0;
  double sd_phi2_scaled = 0.0;      // sqrt(N) sd
  double mean_ratio = 0.0;          // mean over replicates of Q2 / Q1
  double se_mean_phi2 = 0.0;
  double se_sd_phi2_scaled = 0.0;
  double se_mean_ratio = 0.0;
  double th_sd_phi2 = 0.0;          // periodic-field prediction
  double th_ratio = 0.0;            // second-order expansion of E[Q2/Q1]
  double th_ratio_exact_mean = 0.0; // q2/q1 = 2^(2 phi2)
  double scale = 0.0;               // N = n^2
};

std::vector<Table2Cell> run_table2(const Table2Spec& spec);
Table table2_table(const std::vector<Table2Cell>& cells);

// --- four-estimator comparison on shared draws ------------------------------

struct Table3Spec {
  std::vector<int> ns = {30, 40, 50};
  std::vector<double> phi2s = {0.2, 0.4, 0.6, 0.8};
  double phi1 = 1.0;
  int reps = 400;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
};

struct EstStats {
  long used = 0;
  long errored = 0;   // out-of-domain or boundary-stuck replicates
  double mean = 0.0;
  double sd = 0.0;
};

struct Table3Cell {
  int n = 0;
  double phi1 = 1.0;
  double phi2 = 0.0;
  long reps = 0;
  bool ok = false;
  EstStats bilinear;
  EstStats laplacian;
  EstStats whittle;
  EstStats reml;
  double reml_fisher_sd = 0.0;  // expected-information sd at the true phi2
};

std::vector<Table3Cell> run_table3(const Table3Spec& spec);
Table table3_table(const std::vector<Table3Cell>& cells);

// --- sample-vs-true variogram discrepancy lines -----------------------------

struct Fig1Spec {
  int n = 60;
  double phi1 = 1.0;
  double phi2 = 0.8;
  std::vector<int> hs = {1, 2, 4, 8, 16};
  int reps = 25;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
};

struct Fig1Point {
  int rep = 0;
  int h = 0;
  double log2_h = 0.0;      // increasing-domain lag axis
  double log2_h_fd = 0.0;   // fixed-domain lag axis, log2(h) - log2(n)
  double gamma_hat = 0.0;
  double gamma_true = 0.0;
  double half_log2_ratio = 0.0;
};

struct Fig1Result {
  Fig1Spec spec;
  std::vector<Fig1Point> points;
  std::vector<double> slopes;  // per-replicate fitted slope of the discrepancy
  double mean_slope = 0.0;
  double se_slope = 0.0;
};

Fig1Result run_fig1(const Fig1Spec& spec);
Table fig1_table(const Fig1Result& r);
Table fig1_summary_table(const Fig1Result& r);

// --- fixed-domain scatter and degeneracy summary -----------------------------

struct Fig2Spec {
  int n = 60;
  double phi1 = 1.0;
  double phi2 = 0.5;
  int m = 1;
  int reps = 400;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
};

struct Fig2Point {
  int rep = 0;
  double log_phi1 = 0.0;
  double phi2_hat = 0.0;
  double log_fd_unstab = 0.0;  // log phi1_hat + log(n^2) (phi2_hat - phi2)
};

struct Fig2Result {
  Fig2Spec spec;
  long used = 0;
  long out_of_domain = 0;
  bool ok = false;
  std::vector<Fig2Point> points;
  double corr_fd = 0.0;        // corr of (log_fd_unstab, phi2_hat)
  double corr_id = 0.0;        // corr of (log_phi1, phi2_hat)
  double sd_phi2_scaled = 0.0;
  // scale * Cov of the stabilized pair (log phi1_hat, phi2_hat), packed
  // (0,0), (0,1), (1,1); th entries from the finite-lattice prediction.
  double stab_cov[3] = {0.0, 0.0, 0.0};
  double th_stab_cov[3] = {0.0, 0.0, 0.0};
  double th_corr_fd = 0.0;
  double max_stab_rel_err = 0.0;
  double scale = 0.0;
};

Fig2Result run_fig2(const Fig2Spec& spec);
Table fig2_table(const Fig2Result& r);
Table fig2_summary_table(const Fig2Result& r);

// --- robustness drivers ------------------------------------------------------

struct DeletionSpec {
  std::vector<int> ns = {16, 24, 32};
  std::vector<long> ks = {1, 4, 16};
  bool add_quarter = true;  // also evaluate k = n/4 per side
  int m = 1;
  int masks = 12;
  std::uint64_t seed = kDefaultSeed;
};

struct DeletionSummary {
  int n = 0;
  int m = 0;
  long k = 0;
  int masks = 0;
  double mean_normf[2] = {0.0, 0.0};
  double mean_norm2[2] = {0.0, 0.0};
  double mean_c[2] = {0.0, 0.0};  // mean Frobenius norm * N / k
  long max_rank[2] = {0, 0};
  long rank_bound = 0;            // 4 k (m+1)^2
};

std::vector<DeletionSummary> run_deletion(const DeletionSpec& spec);
Table deletion_table(const std::vector<DeletionSummary>& rows);

struct ThinningSpec {
  std::vector<int> ns = {24, 40, 60};
  double a = 0.75;          // retention 1 - N^(-a)
  double a_control = 0.25;  // deliberately too-aggressive schedule
  double phi2 = 0.5;
  int reps = 64;
  std::uint64_t seed = kDefaultSeed;
};

struct ThinningResult {
  ThinningSpec spec;
  std::vector<ThinningCell> main;
  std::vector<ThinningCell> control;
};

ThinningResult run_thinning(const ThinningSpec& spec);
Table thinning_table(const ThinningResult& r);

struct JitterSpec {
  std::vector<int> ns = {16, 32};
  double c = 0.4;
  double nu = 1.5;  // phi2 of the tangent model
  double sigma2 = 1.0;
  double rho = 1.0;
  int m = 2;
  int reps = 64;
  std::uint64_t seed = kDefaultSeed;
};

struct JitterResult {
  JitterSpec spec;
  std::vector<JitterCell> cells;
  double rescaled_dq1_ratio = 0.0;  // consecutive-n ratio of n^(2 nu) E|dQ1|
};

JitterResult run_jitter(const JitterSpec& spec);
Table jitter_table(const JitterResult& r);

struct MisspecSpec {
  int n = 60;
  int m = 2;
  double nu = 0.5;
  double sigma2 = 1.0;
  double rho = 1.0;
  int reps = 400;
  int domination_grid = 101;
  std::uint64_t seed = kDefaultSeed;
};

struct MisspecResult {
  MisspecSpec spec;
  MisspecCell cell;
  bool domination_pass = false;
  double domination_worst = 0.0;
  double c_mat = 0.0;  // tangent scale; the limit of n^(2 phi2_hat) phi1_hat
};

MisspecResult run_misspec(const MisspecSpec& spec);
Table misspec_table(const MisspecResult& r);

// Exact boundary-trimming gap Var(Q1 - Q1trim) at several sizes, with both
// normalizations of sqrt(count)-scaling reported.
struct TrimmingRow {
  int n = 0;
  int m = 1;
  double phi2 = 0.0;
  double var_raw = 0.0;
  double var_scaled_trim_count = 0.0;  // (n-4m)^2 * var
  double var_scaled_sites = 0.0;       // n^2 * var
};

std::vector<TrimmingRow> run_trimming(const std::vector<int>& ns, int m,
                                      const std::vector<double>& phi2s);
Table trimming_table(const std::vector<TrimmingRow>& rows);

// Theory-only predictions for one design cell, with the kind tag.
Table theory_table(const std::vector<int>& ns, const std::vector<double>& phi2s, double phi1,
                   int m, TrimMode mode, PredictionKind kind);

// Reads experiment=<name> (table1, table2, table3, fig1, fig2, deletion,
// thinning, jitter, matern, trimming, custom) plus design overrides from the
// config, runs it, and writes one file per result table into out_dir.
// Returns the file paths written. Throws ConfigError for bad configs and
// std::runtime_error for numeric failures.
std::vector<std::string> run_experiment_files(const Config& cfg, const std::string& out_dir,
                                              const std::string& format, std::ostream& progress);

}  // namespace rfqv
