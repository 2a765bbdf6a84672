#pragma once

namespace rfqv {

// Gamma function including negative non-integer arguments (signed).
double gamma_fn(double x);

// log |Gamma(x)|
double lgamma_abs(double x);

// Digamma psi(x) for non-pole real x, >= 12 significant digits.
double digamma(double x);

// Modified Bessel function of the second kind K_nu(x), nu >= 0, x > 0.
double bessel_kv(double nu, double x);

}  // namespace rfqv
