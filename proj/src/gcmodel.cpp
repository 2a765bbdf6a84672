#include "rfqv/gcmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rfqv/specfun.hpp"

namespace rfqv {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_integer(double x) { return x == std::floor(x); }

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

void PowerLawParams::validate() const {
  if (!std::isfinite(phi1) || !std::isfinite(phi2))
    throw std::invalid_argument("gcmodel: power-law parameters must be finite");
  if (phi1 <= 0.0) throw std::invalid_argument("gcmodel: phi1 must be positive");
  if (phi2 <= 0.0 || phi2 >= 2.0)
    throw std::invalid_argument("gcmodel: phi2 must lie in (0,2)");
  if (is_integer(phi2))
    throw std::invalid_argument(
        "gcmodel: integer phi2 hits a Gamma pole; use gc_powerlaw_integer for the log form");
}

double MaternParams::kappa() const { return std::sqrt(2.0 * nu) / rho; }

void MaternParams::validate() const {
  if (!std::isfinite(sigma2) || !std::isfinite(rho) || !std::isfinite(nu))
    throw std::invalid_argument("gcmodel: Matern parameters must be finite");
  if (sigma2 <= 0.0 || rho <= 0.0 || nu <= 0.0)
    throw std::invalid_argument("gcmodel: Matern parameters must be positive");
}

double gc_powerlaw(double h1, double h2, const PowerLawParams& p) {
  p.validate();
  if (!std::isfinite(h1) || !std::isfinite(h2))
    throw std::invalid_argument("gcmodel: lag must be finite");
  const double r2 = h1 * h1 + h2 * h2;
  if (r2 == 0.0) return 0.0;
  return p.phi1 * gamma_fn(-p.phi2) * std::pow(r2, p.phi2);
}

double gc_powerlaw_integer(double h1, double h2, double phi1, int phi2) {
  if (phi2 < 1) throw std::invalid_argument("gcmodel: integer form requires phi2 >= 1");
  const double r2 = h1 * h1 + h2 * h2;
  if (r2 == 0.0) return 0.0;
  const double sign = (phi2 % 2 == 0) ? -1.0 : 1.0;
  double fact = 1.0;
  for (int i = 2; i <= phi2; ++i) fact *= i;
  return 2.0 * phi1 * sign / fact * std::pow(r2, phi2) * (0.5 * std::log(r2));
}

double semivariogram_powerlaw(double r, const PowerLawParams& p) {
  p.validate();
  if (!(r >= 0.0)) throw std::invalid_argument("gcmodel: semivariogram lag must be >= 0");
  if (r == 0.0) return 0.0;
  return p.phi1 * std::abs(gamma_fn(-p.phi2)) * std::pow(r * r, p.phi2);
}

double matern_cov(double r, const MaternParams& q) {
  q.validate();
  if (!(r >= 0.0)) throw std::invalid_argument("gcmodel: Matern lag must be >= 0");
  if (r == 0.0) return q.sigma2;
  const double kr = q.kappa() * r;
  return q.sigma2 * std::pow(2.0, 1.0 - q.nu) / gamma_fn(q.nu) * std::pow(kr, q.nu) *
         bessel_kv(q.nu, kr);
}

TangentPL tangent_powerlaw(const MaternParams& q) {
  q.validate();
  if (q.nu >= 1.0 || is_integer(q.nu))
    throw std::invalid_argument("gcmodel: tangent expansion needs non-integer nu in (0,1)");
  const double k = q.kappa();
  const double c_mat = q.sigma2 * std::pow(k, 2.0 * q.nu) * std::abs(gamma_fn(-q.nu)) /
                       (std::pow(2.0, 2.0 * q.nu) * gamma_fn(q.nu));
  const double a_mat = q.sigma2 * k * k / (4.0 * (1.0 - q.nu));
  TangentPL t;
  t.c_mat = c_mat;
  t.a_mat = a_mat;
  t.nu = q.nu;
  t.tangent.phi1 = c_mat / std::abs(gamma_fn(-q.nu));
  t.tangent.phi2 = q.nu;
  return t;
}

double spectral_const(double phi2) {
  return std::pow(2.0, 2.0 * phi2 + 2.0) * kPi * gamma_fn(1.0 + phi2);
}

double spectral_density_powerlaw(double w1, double w2, const PowerLawParams& p) {
  p.validate();
  const double r2 = w1 * w1 + w2 * w2;
  if (r2 == 0.0) throw std::invalid_argument("gcmodel: power-law spectrum diverges at 0");
  return spectral_const(p.phi2) * p.phi1 * std::pow(r2, -1.0 - p.phi2);
}

double spectral_density_matern(double w1, double w2, const MaternParams& q) {
  q.validate();
  const double k2 = q.kappa() * q.kappa();
  return 4.0 * kPi * q.nu * q.sigma2 * std::pow(k2, q.nu) *
         std::pow(k2 + w1 * w1 + w2 * w2, -(1.0 + q.nu));
}

namespace {

struct StencilSums {
  double plain;  // sum_{a != b} c_a c_b (d^2)^phi2
  double logw;   // same with an extra log(d^2) factor
};

StencilSums stencil_sums(int m, double phi2) {
  if (m < 1 || m > 2) throw std::invalid_argument("gcmodel: stencil order must be 1 or 2");
  const int w = m + 1;
  std::vector<double> c(w * w);
  for (int a1 = 0; a1 < w; ++a1)
    for (int a2 = 0; a2 < w; ++a2)
      c[a1 * w + a2] = ((a1 + a2) % 2 == 0 ? 1.0 : -1.0) * binom(m, a1) * binom(m, a2);
  StencilSums s{0.0, 0.0};
  for (int a1 = 0; a1 < w; ++a1)
    for (int a2 = 0; a2 < w; ++a2)
      for (int b1 = 0; b1 < w; ++b1)
        for (int b2 = 0; b2 < w; ++b2) {
          const int d2 = (b1 - a1) * (b1 - a1) + (b2 - a2) * (b2 - a2);
          if (d2 == 0) continue;
          const double cc = c[a1 * w + a2] * c[b1 * w + b2];
          const double pw = std::pow(static_cast<double>(d2), phi2);
          s.plain += cc * pw;
          s.logw += cc * pw * std::log(static_cast<double>(d2));
        }
  return s;
}

void check_am_domain(int m, double phi2) {
  if (!(phi2 > 0.0) || phi2 >= static_cast<double>(m) || is_integer(phi2))
    throw std::invalid_argument("gcmodel: a_m needs non-integer phi2 in (0,m)");
}

}  // namespace

double stencil_pair_sum(int m, double phi2, bool log_weighted) {
  const StencilSums s = stencil_sums(m, phi2);
  return log_weighted ? s.logw : s.plain;
}

double a_m(int m, double phi2) {
  check_am_domain(m, phi2);
  return gamma_fn(-phi2) * stencil_sums(m, phi2).plain;
}

double a_m_prime(int m, double phi2) {
  check_am_domain(m, phi2);
  const StencilSums s = stencil_sums(m, phi2);
  return gamma_fn(-phi2) * (-digamma(-phi2) * s.plain + s.logw);
}

double a_laplacian(double phi2) {
  if (!(phi2 > 0.0) || phi2 >= 1.0 || is_integer(phi2))
    throw std::invalid_argument("gcmodel: a_laplacian needs non-integer phi2 in (0,1)");
  // five-point stencil: weight -4 at the center, +1 on the four arms
  const std::array<std::array<int, 2>, 5> pts = {{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  const std::array<double, 5> c = {-4.0, 1.0, 1.0, 1.0, 1.0};
  double t = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const int d1 = pts[j][0] - pts[i][0];
      const int d2 = pts[j][1] - pts[i][1];
      const int r2 = d1 * d1 + d2 * d2;
      if (r2 == 0) continue;
      t += c[i] * c[j] * std::pow(static_cast<double>(r2), phi2);
    }
  return gamma_fn(-phi2) * t;
}

}  // namespace rfqv
