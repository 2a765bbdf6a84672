#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rfqv/filters.hpp"

namespace rfqv {

enum class QvFamily { bilinear, laplacian };

// Moment estimate from two-scale quadratic variations. phi2_hat is always the
// raw half-log ratio; phi1_hat is present only when phi2_hat lies strictly
// inside the admissible range and clear of the integer poles. Never clamped.
struct MomEstimate {
  QvFamily family = QvFamily::bilinear;
  int n = 0;
  int m = 1;
  TrimMode trim = TrimMode::common;
  QvStats qv;
  double phi2_hat = 0.0;
  std::optional<double> phi1_hat;
  bool out_of_domain = false;
  bool degenerate = false;
};

inline constexpr double kIntegerPoleGuard = 1e-3;

MomEstimate mom_estimate(const Grid& x, int m, TrimMode mode);
MomEstimate mom_estimate_filtered(const Grid& d1, int n_raw, int m, TrimMode mode);
MomEstimate mom_estimate_torus(const Grid& y, int m);

// Five-point Laplacian variant: steps 1 and 2, admissible range (0, 1).
MomEstimate laplacian_estimate(const Grid& x);

// Two-scale Laplacian variations with their window sizes (side n - 2j).
QvStats laplacian_variations(const Grid& x);

// View of a moment estimate in the fractal-dimension parameterization
// tau = (phi1 n^(-2 phi2), phi2). tau2 aliases phi2_hat bitwise; the
// truth-dependent members need the true (phi1, phi2).
struct FdView {
  double tau2_hat = 0.0;
  std::optional<double> tau1_hat;       // n^(-2 phi2_true) phi1_hat
  std::optional<double> log_rescaled;   // log(N^tau2 tau1) = log phi1_hat + L (phi2_hat - phi2_true)
  std::optional<double> w_stat;         // N^tau2 tau1 / phi1_true - 1
};

FdView fd_view(const MomEstimate& e, double phi1_true, double phi2_true);

// Axis-lag semivariogram estimate at integer lag h, averaged over both axes.
double empirical_variogram(const Grid& x, int h);

// --- Whittle -----------------------------------------------------------

struct WhittleOptions {
  int m = 1;
  double mask_rel = 1e-3;   // keep frequencies with |g|^2 >= mask_rel * max
  int truncation = 30;
  int cheb_nodes = 24;
  double edge = 0.01;       // search over (edge, m - edge)
  double scan_step = 0.01;
  double brent_tol = 1e-6;
};

struct WhittleFit {
  double phi2_hat = 0.0;
  double phi1_hat = 0.0;
  double objective = 0.0;
  long used_frequencies = 0;
};

// Profile Whittle likelihood on the filtered window Y = D X over side n - 2m.
// Construction tabulates the smooth part of the lattice spectral shape per
// kept frequency (Chebyshev in phi2, with the phi2 = 0 pole split off
// analytically), so one table serves every replicate at this (n, m).
class WhittleSpectrumTable {
 public:
  WhittleSpectrumTable(int n_raw, const WhittleOptions& opt = {});

  int n_raw() const { return n_raw_; }
  int window_side() const { return side_; }
  const WhittleOptions& options() const { return opt_; }

  WhittleFit fit(const Grid& x) const;
  WhittleFit fit_filtered(const Grid& d1) const;

  // Exact vs tabulated log spectral shape at one kept frequency (test hook).
  double interpolation_error(double phi2) const;

 private:
  double objective(double phi2, const std::vector<double>& periodogram, double* phi1_out) const;

  int n_raw_;
  int side_;
  WhittleOptions opt_;
  std::vector<long> kept_;          // indices into the side_ x side_ frequency grid
  std::vector<double> g_sq_;        // |g|^2 at kept frequencies
  double sum_log_gsq_ = 0.0;
  std::vector<double> cheb_;        // kept x nodes coefficient table for log G
  std::vector<double> l1_, l2_;     // frequencies of kept entries
};

WhittleFit whittle_estimate(const Grid& x, const WhittleOptions& opt = {});

// --- REML ---------------------------------------------------------------

inline constexpr long kRemlDimCap = 2500;

struct RemlOptions {
  int m = 1;
  double edge = 0.01;
  double scan_step = 0.01;
  double brent_tol = 1e-6;
};

struct RemlFit {
  double phi2_hat = 0.0;
  double phi1_hat = 0.0;
  double objective = 0.0;
};

// Gaussian likelihood of the filtered window (the increment likelihood), with
// the amplitude profiled out. One factorization per objective evaluation;
// meant for single fields at small n.
RemlFit reml_estimate(const Grid& x, const RemlOptions& opt = {});

// Batch path: evaluates every field's objective over the phi2 scan grid,
// factoring each grid covariance exactly once, then refines each minimum by
// parabolic interpolation of the stored curve.
class RemlGridEstimator {
 public:
  RemlGridEstimator(int n_raw, const RemlOptions& opt = {});
  std::vector<RemlFit> fit_all(const std::vector<Grid>& d1_fields) const;

  // Profile expected-information SD of phi2_hat at the given truth,
  // Var = [tr(T^2)/2 - tr(T)^2/(2M)]^(-1), T = S0^(-1) dS0/dphi2.
  double fisher_sd(double phi2) const;

 private:
  int n_raw_;
  int side_;
  RemlOptions opt_;
  std::vector<double> grid_;
};

}  // namespace rfqv
