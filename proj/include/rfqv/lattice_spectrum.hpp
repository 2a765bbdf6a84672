#pragma once

#include <vector>

#include "rfqv/gcmodel.hpp"

namespace rfqv {

inline constexpr int kDefaultAliasTruncation = 30;

// Tail of the periodized power sum, sum over |k|_inf > trunc of |l + 2 pi k|^(-s),
// expanded to fourth order in l. Valid for |l|_inf <= pi and s > 2; relative
// accuracy better than 1e-8 of the full periodized sum at trunc = 30, s >= 2.2.
class PowSumTail {
 public:
  PowSumTail(double s, int trunc);
  double operator()(double l1, double l2) const;

 private:
  double s_;
  double t0_, a2_, s40_, s22_;
};

// Spectral density of the unit-lattice sample of a continuum field, i.e. the
// 2 pi-periodization f_X(l) = sum_k f0(l + 2 pi k) on the torus (-pi, pi]^2.
// Terms with |k|_inf <= trunc are summed directly; the remainder is the
// analytic tail above (binomially reduced to pure power sums for Matern).
class LatticeSpectrum {
 public:
  explicit LatticeSpectrum(const PowerLawParams& p, int trunc = kDefaultAliasTruncation);
  explicit LatticeSpectrum(const MaternParams& q, int trunc = kDefaultAliasTruncation);

  // requires |l|_inf <= pi; throws at l = 0 for the power law (f diverges there)
  double operator()(double l1, double l2) const;

  int truncation() const { return trunc_; }
  bool is_power_law() const { return power_law_; }

 private:
  bool power_law_;
  PowerLawParams pl_{};
  MaternParams mat_{};
  int trunc_;
  double base_;                     // multiplicative front constant
  double kappa2_ = 0.0;             // Matern only
  std::vector<double> tail_coef_;   // weights on the power-sum tails
  std::vector<PowSumTail> tails_;
};

double aliased_spectrum(double l1, double l2, const LatticeSpectrum& spec);

// Direct partial sum of |l + 2 pi k|^(-s) over |k|_inf <= trunc, no tail.
// Increasing in trunc; used to exhibit monotone convergence of the aliasing sum.
double periodized_partial_sum(double l1, double l2, double s, int trunc);

// The frequency-independent part of the power-law aliasing sum that carries
// its pole at phi2 = 0: the integral over the box complement left after the
// summed rings at the given truncation. The remainder of the shape,
// f(l; 1, phi2) / c(phi2) - alias_pole_term(phi2, trunc), is entire in phi2,
// which is what makes low-order interpolation in phi2 work.
double alias_pole_term(double phi2, int trunc);

}  // namespace rfqv
