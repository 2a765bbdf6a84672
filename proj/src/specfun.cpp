#include "rfqv/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace rfqv {

double gamma_fn(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("specfun: gamma of non-finite argument");
  if (x <= 0.0 && x == std::floor(x)) throw std::invalid_argument("specfun: gamma pole at non-positive integer");
  return std::tgamma(x);
}

double lgamma_abs(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("specfun: lgamma of non-finite argument");
  if (x <= 0.0 && x == std::floor(x)) throw std::invalid_argument("specfun: lgamma pole at non-positive integer");
  return std::lgamma(x);
}

double digamma(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("specfun: digamma of non-finite argument");
  if (x <= 0.0) {
    if (x == std::floor(x)) throw std::invalid_argument("specfun: digamma pole at non-positive integer");
    // reflection: psi(x) = psi(1-x) - pi cot(pi x)
    const double pi = 3.14159265358979323846;
    return digamma(1.0 - x) - pi / std::tan(pi * x);
  }
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum B_{2k}/(2k x^{2k}); coefficients through B_14
  const double inv = 1.0 / x, inv2 = inv * inv;
  double series = 1.0 / 12.0
      - inv2 * (1.0 / 120.0
      - inv2 * (1.0 / 252.0
      - inv2 * (1.0 / 240.0
      - inv2 * (1.0 / 132.0
      - inv2 * (691.0 / 32760.0
      - inv2 * (1.0 / 12.0))))));
  return acc + std::log(x) - 0.5 * inv - inv2 * series;
}

double bessel_kv(double nu, double x) {
  if (!(nu >= 0.0) || !(x > 0.0)) throw std::invalid_argument("specfun: bessel_kv requires nu >= 0 and x > 0");
  return std::cyl_bessel_k(nu, x);
}

}  // namespace rfqv
