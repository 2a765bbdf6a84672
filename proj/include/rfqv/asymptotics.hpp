#pragma once

#include <array>

#include <Eigen/Dense>

#include "rfqv/fieldsim.hpp"
#include "rfqv/filters.hpp"
#include "rfqv/gcmodel.hpp"

namespace rfqv {

inline constexpr int kFiniteCovCap = 128;

struct QuadSpec {
  int gl_points = 24;   // Gauss-Legendre nodes per axis and rectangle
  int levels = 46;      // dyadic annuli toward the spectral origin
  int truncation = 30;  // alias ring truncation for the lattice spectrum
};

// Exact covariance of (Q1, Q2) over the finite anchor windows, by summing
// squared filtered covariances against pair counts. Unscaled (raw Cov).
Eigen::Matrix2d finite_cov_qq(int n, int m, const ModelSpec& model, TrimMode mode,
                              std::array<double, 2>* q_out = nullptr);

// Same for the stationary periodic filtered field on Z_n^2.
Eigen::Matrix2d torus_cov_qq(int n, int m, const ModelSpec& model, int truncation = 30,
                             std::array<double, 2>* q_out = nullptr);

// Limit of M * Cov(Q) (common windows): Sigma_{lr} = 2/(2pi)^2 * Int b_l b_r F^2,
// F = |g_m|^2 f_lat, b_1 = 1, b_2 = B_m. Needs m > phi2 + 1/2 for integrability.
Eigen::Matrix2d asymptotic_sigma(int m, const PowerLawParams& p, const QuadSpec& spec = {});

// Limiting means q_j = phi1 a_m(phi2) j^(2 phi2).
std::array<double, 2> asymptotic_q(int m, const PowerLawParams& p);

// d(phi1_hat, phi2_hat)/d(q1, q2) at the point implied by (q1, q2):
// phi2* = log2(q2/q1)/2, phi1* = q1/a_m(phi2*).
Eigen::Matrix2d delta_jacobian(double q1, double q2, int m);

enum class PredictionKind { finite_window, torus, asymptotic };

// Covariance prediction for the moment estimator, in scaled units: sigma_qq
// and omega are scale * Cov, with scale = M1 (finite windows), N (torus), or
// already the limit (asymptotic, scale reported as 0).
struct CovPrediction {
  PredictionKind kind = PredictionKind::finite_window;
  int n = 0;
  int m = 1;
  TrimMode trim = TrimMode::common;
  double q1 = 0.0;
  double q2 = 0.0;
  double scale = 0.0;
  Eigen::Matrix2d sigma_qq;   // scale * Cov(Q1, Q2)
  Eigen::Matrix2d jacobian;   // delta_jacobian(q1, q2, m)
  Eigen::Matrix2d omega;      // scale * Cov(phi1_hat, phi2_hat)
  Eigen::Matrix2d omega_rel;  // phi1 row/col in relative units (log phi1)

  double sd_phi1_scaled() const { return std::sqrt(omega(0, 0)); }
  double sd_phi2_scaled() const { return std::sqrt(omega(1, 1)); }
  double corr() const { return omega(0, 1) / std::sqrt(omega(0, 0) * omega(1, 1)); }
};

CovPrediction estimator_cov(int n, int m, const ModelSpec& model, TrimMode mode,
                            PredictionKind kind, const QuadSpec& spec = {});

// Fractal-dimension parameterization tau = (phi1 N^(-phi2), phi2) with N = n^2
// lattice sites. The stabilized covariance of (log tau1_hat + L tau2_hat,
// tau2_hat), L = log N, equals omega_rel; the raw pair is wildly correlated.
struct FdPrediction {
  double log_sites = 0.0;          // L = log(n^2)
  Eigen::Matrix2d stabilized;      // scale * Cov of the stabilized pair
  Eigen::Matrix2d unstabilized;    // scale * Cov of (log tau1_hat, tau2_hat)
  double corr_unstabilized = 0.0;
};

FdPrediction fd_prediction(const CovPrediction& cp);

// Exact means of (Q1, Q2) for a Matern field sampled on the lattice t/n.
std::array<double, 2> matern_filtered_means(const MaternParams& q, int n, int m);

// Exact Var(Q1 - Q1trim), unscaled, where Q1 averages the squared step-1
// differences over the side n-2m window and Q1trim re-averages them over the
// centered interior of side n-4m. A boundary-order quantity: once multiplied
// by a sample-size factor it decays like 1/n, because the two windows share
// all but an O(n) strip. Callers choose the size factor; the trimmed count
// (n-4m)^2 isolates the 1/n rate already at small n, while the raw site
// count n^2 carries a strong pre-asymptotic window-mismatch correction.
double trimming_gap_variance(int n, int m, const ModelSpec& model);

}  // namespace rfqv
