#pragma once

#include <array>

namespace rfqv {

// Power-law generalized covariance K(h) = phi1 * Gamma(-phi2) * |h|^(2 phi2).
// phi2 must be positive and non-integer; the estimation theory uses
// phi2 in (0,1) for first-order filters and (1,2) for second-order ones.
struct PowerLawParams {
  double phi1 = 1.0;
  double phi2 = 0.5;

  void validate() const;  // throws on non-finite, phi1 <= 0, integer or out-of-range phi2
};

struct MaternParams {
  double sigma2 = 1.0;  // marginal variance
  double rho = 1.0;     // range parameter, kappa = sqrt(2 nu)/rho
  double nu = 0.5;      // smoothness

  double kappa() const;
  void validate() const;
};

// Small-lag tangent expansion of a Matern model:
//   C(0) - C(r) = c_mat * r^(2 nu) - a_mat * r^2 + o(r^2),  0 < nu < 1,
// with both coefficients stored positive. The power law tangent to it
// (same local behavior) has phi2 = nu and phi1 = c_mat / |Gamma(-nu)|.
struct TangentPL {
  double c_mat;
  double a_mat;
  double nu;
  PowerLawParams tangent;
};

double gc_powerlaw(double h1, double h2, const PowerLawParams& p);

// Integer-phi2 logarithmic form, exposed as a standalone formula evaluator only:
// K(h) = 2 phi1 (-1)^(phi2+1) / phi2! * |h|^(2 phi2) * log |h|.
double gc_powerlaw_integer(double h1, double h2, double phi1, int phi2);

double semivariogram_powerlaw(double r, const PowerLawParams& p);

double matern_cov(double r, const MaternParams& q);

TangentPL tangent_powerlaw(const MaternParams& q);

// Normalization of the continuum power-law spectral density under the
// convention K(h) = int e^(i h.w) f0(w) dw / (2 pi)^2:
//   f0(w) = spectral_const(phi2) * phi1 * |w|^(-2-2 phi2).
double spectral_const(double phi2);

double spectral_density_powerlaw(double w1, double w2, const PowerLawParams& p);

// Matern spectral density in the same angular-frequency convention:
// f(w) = 4 pi nu sigma2 kappa^(2 nu) (kappa^2 + |w|^2)^(-(1+nu)).
double spectral_density_matern(double w1, double w2, const MaternParams& q);

// Stencil geometry sums behind the filtered-field means.
// T_m(phi2) = sum_{a != b} c_a c_b |b-a|^(2 phi2) over the (m+1)^2 bilinear stencil;
// a_m = Gamma(-phi2) * T_m, positive on (0,1) and (1,2).
double stencil_pair_sum(int m, double phi2, bool log_weighted = false);
double a_m(int m, double phi2);
double a_m_prime(int m, double phi2);

// Five-point Laplacian analogue (weights -4 center, +1 arms), unit step.
double a_laplacian(double phi2);

}  // namespace rfqv
