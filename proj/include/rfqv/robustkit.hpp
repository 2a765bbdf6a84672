#pragma once

#include <cstdint>
#include <vector>

#include "rfqv/estimate.hpp"
#include "rfqv/fieldsim.hpp"
#include "rfqv/filters.hpp"
#include "rfqv/gcmodel.hpp"
#include "rfqv/rng.hpp"

namespace rfqv {

inline constexpr std::uint64_t kStreamNoise = 4;

struct SiteMask {
  int n = 0;
  std::vector<char> deleted;

  bool at(int t1, int t2) const { return deleted[static_cast<std::size_t>(t1) * n + t2] != 0; }
  long count() const;

  static SiteMask empty(int n);
  static SiteMask single(int n, int t1, int t2);
  static SiteMask row_segment(int n, int row, int col0, int col1);  // inclusive cols
  static SiteMask diagonal_swath(int n, int width);
  static SiteMask random_uniform(int n, long k, Rng& rng);
  static SiteMask bernoulli(int n, double delete_prob, Rng& rng);
};

// Quadratic variations with deleted sites. A window row survives only if every
// raw site its computation touches is present; each step divides by its own
// surviving count. Step 2 is evaluated through the same step-1 block-sum path
// as the plain statistic, so its row support is the box t + {0..2m}^2; with an
// empty mask the result is bit-identical to quadratic_variations.
struct PrunedQv {
  QvStats qv;
  long kept[2] = {0, 0};
  long removed[2] = {0, 0};
};

PrunedQv prune_and_qv(const Grid& x, int m, TrimMode mode, const SiteMask& mask);

// Perturbation of the quadratic-form matrices A_j = F_j^T F_j / M_j under row
// deletion, at explicit-matrix scale. Norms are measured on the own-divisor
// perturbation A~ - A (each side divided by its own row count); the rank is
// counted on the fixed-divisor row-removal part (F~^T F~ - F^T F) / M_j,
// which is exactly a sum of removed-row outer products. The divisor
// renormalization term is full-support but smaller by another k/N factor, so
// it contributes to the norms while the removal part carries the low rank.
struct DeletionBounds {
  int n = 0;
  int m = 0;
  long k = 0;  // deleted sites
  double norm2[2] = {0.0, 0.0};
  double normf[2] = {0.0, 0.0};
  long removed_rows[2] = {0, 0};
  long rank_removal[2] = {0, 0};
  double c_norm[2] = {0.0, 0.0};  // normf * N / k
};

DeletionBounds measure_deletion_perturbation(int n, int m, const SiteMask& mask);

// Bernoulli site thinning paired against the intact field, anchored sampling.
struct ThinningCell {
  int n = 0;
  double exponent_a = 0.0;
  double delete_prob = 0.0;  // N^(-a)
  long reps = 0;
  double mean_abs_dphi2 = 0.0;
  double sd_phi2 = 0.0;  // spread of the intact estimate
  double mean_sqrtn_abs_dq1 = 0.0;  // sqrt(N) |pruned Q1 - Q1|
  double mean_removed_frac = 0.0;
  long out_of_domain = 0;
};

std::vector<ThinningCell> thinning_experiment(const std::vector<int>& ns, double a, double phi2,
                                              int reps, std::uint64_t seed);

// Matern field sampled at jittered lattice locations, coupled to the clean
// lattice draw through the conditional decomposition, so c = 0 reproduces the
// unjittered simulation bit for bit.
struct JitterCell {
  int n = 0;
  double c = 0.0;
  long reps = 0;
  double mean_q1 = 0.0;
  double mean_abs_dq1 = 0.0;
  double mean_abs_dq1_rescaled = 0.0;   // n^(2 nu) E|dQ1|
  double per_site_msq_rescaled = 0.0;   // n^(2 nu) mean site-wise squared filter diff
  double sd_phi2_clean = 0.0;
  double sd_phi2_jittered = 0.0;
};

std::vector<JitterCell> jitter_experiment(const std::vector<int>& ns, double c,
                                          const MaternParams& q, int m, int reps,
                                          std::uint64_t seed);

// Moment estimator applied to a Matern truth on the shrinking lattice t/n.
struct MisspecCell {
  int n = 0;
  int m = 2;
  double nu = 0.5;
  long reps = 0;
  double mean_phi2 = 0.0;
  double sd_phi2_scaled = 0.0;  // sqrt(M_int) * sd
  double th_sd_scaled = 0.0;    // tangent power-law limit
  double mean_kappa = 0.0;      // mean of n^(2 phi2hat) phi1hat
  long out_of_domain = 0;
};

MisspecCell misspec_experiment(int n, int m, const MaternParams& q, int reps, std::uint64_t seed);

// Pointwise check that |g|^2 f_matern_lat <= |g|^2 f_tangent_lat on a uniform
// frequency grid; worst signed margin (positive = violation) is reported.
bool spectral_domination(const MaternParams& q, int m, int grid_pts, int truncation,
                         double* worst_margin);

// Fitted log-log slope of E|Q1(y + u z) - Q1(y)| against the noise scale u.
double input_error_exponent(int n, int m, double phi2, const std::vector<double>& us, int reps,
                            std::uint64_t seed);

}  // namespace rfqv
