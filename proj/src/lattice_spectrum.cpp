#include "rfqv/lattice_spectrum.hpp"

#include <cmath>
#include <stdexcept>

#include "rfqv/quadrature.hpp"

namespace rfqv {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958648;
constexpr int kTailRings = 200;       // direct rings beyond the truncation box
constexpr int kMaternTailTerms = 5;   // binomial reduction order for the Matern tail

// C(p) = int_0^1 (1 + t^2)^(-p/2) dt
double half_strip_integral(double p) {
  static const GaussLegendre g = gauss_legendre(32);
  double s = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double t = 0.5 * (g.x[i] + 1.0);
    s += 0.5 * g.w[i] * std::pow(1.0 + t * t, -0.5 * p);
  }
  return s;
}

// int over |u|_inf > W of |u|^(-p) du = 8 C(p) W^(2-p) / (p-2)
double box_complement_integral(double p, double w) {
  return 8.0 * half_strip_integral(p) * std::pow(w, 2.0 - p) / (p - 2.0);
}

void check_torus_point(double l1, double l2) {
  if (!std::isfinite(l1) || !std::isfinite(l2))
    throw std::invalid_argument("lattice_spectrum: frequency must be finite");
  if (std::abs(l1) > kPi + 1e-12 || std::abs(l2) > kPi + 1e-12)
    throw std::invalid_argument("lattice_spectrum: frequency must lie in (-pi, pi]^2");
}

}  // namespace

PowSumTail::PowSumTail(double s, int trunc) : s_(s) {
  if (!(s > 2.0)) throw std::invalid_argument("lattice_spectrum: tail exponent must exceed 2");
  if (trunc < 1) throw std::invalid_argument("lattice_spectrum: truncation must be >= 1");

  // Lattice sums over trunc < |k|_inf <= trunc + kTailRings, at points u = 2 pi k:
  //   t0 = sum r^-s, a2 = sum r^-(s+2), a4 = sum r^-(s+4), c44 = sum u1^4 r^-(s+8).
  double t0 = 0.0, a2 = 0.0, a4 = 0.0, c44 = 0.0;
  const int outer = trunc + kTailRings;
  auto add_point = [&](long long k1, long long k2) {
    const double u1 = kTwoPi * static_cast<double>(k1);
    const double u2 = kTwoPi * static_cast<double>(k2);
    const double r2 = u1 * u1 + u2 * u2;
    const double pw = std::pow(r2, -0.5 * s - 4.0);  // r^-(s+8)
    c44 += u1 * u1 * u1 * u1 * pw;
    a4 += pw * r2 * r2;
    a2 += pw * r2 * r2 * r2;
    t0 += pw * r2 * r2 * r2 * r2;
  };
  for (int ring = trunc + 1; ring <= outer; ++ring) {
    for (int k = -ring; k <= ring; ++k) {
      add_point(ring, k);
      add_point(-ring, k);
    }
    for (int k = -ring + 1; k <= ring - 1; ++k) {
      add_point(k, ring);
      add_point(k, -ring);
    }
  }

  // Beyond the direct rings, midpoint-corrected integral approximation:
  //   sum_{|k|_inf > outer} g(2 pi k) = (2 pi)^-2 int g du - (1/24) int (Lap g) du,
  // over |u|_inf > W, with Lap |u|^-p = p^2 |u|^-(p+2). a4 and c44 only enter the
  // fourth-order frequency terms, already negligible past the rings.
  const double w = kTwoPi * (outer + 0.5);
  t0 += box_complement_integral(s, w) / (kTwoPi * kTwoPi) -
        (s / 3.0) * half_strip_integral(s + 2.0) * std::pow(w, -s);
  a2 += box_complement_integral(s + 2.0, w) / (kTwoPi * kTwoPi) -
        ((s + 2.0) / 3.0) * half_strip_integral(s + 4.0) * std::pow(w, -s - 2.0);

  t0_ = t0;
  a2_ = a2;
  s40_ = -3.0 * s * (s + 2.0) * (s + 3.0) * a4 + s * (s + 2.0) * (s + 4.0) * (s + 6.0) * c44;
  s22_ = -s * (s + 2.0) * (s + 3.0) * a4 +
         0.5 * s * (s + 2.0) * (s + 4.0) * (s + 6.0) * (a4 - 2.0 * c44);
}

double PowSumTail::operator()(double l1, double l2) const {
  const double q1 = l1 * l1, q2 = l2 * l2;
  return t0_ + 0.25 * s_ * s_ * (q1 + q2) * a2_ +
         ((q1 * q1 + q2 * q2) * s40_ + 6.0 * q1 * q2 * s22_) / 24.0;
}

LatticeSpectrum::LatticeSpectrum(const PowerLawParams& p, int trunc)
    : power_law_(true), pl_(p), trunc_(trunc) {
  p.validate();
  if (trunc < 1) throw std::invalid_argument("lattice_spectrum: truncation must be >= 1");
  base_ = spectral_const(p.phi2) * p.phi1;
  tail_coef_.push_back(1.0);
  tails_.emplace_back(2.0 + 2.0 * p.phi2, trunc);
}

LatticeSpectrum::LatticeSpectrum(const MaternParams& q, int trunc)
    : power_law_(false), mat_(q), trunc_(trunc) {
  q.validate();
  if (trunc < 1) throw std::invalid_argument("lattice_spectrum: truncation must be >= 1");
  const double kap = q.kappa();
  if (kap > 0.5 * kPi * (trunc + 1))
    throw std::invalid_argument(
        "lattice_spectrum: kappa too large for the tail expansion; raise the truncation");
  kappa2_ = kap * kap;
  base_ = 4.0 * kPi * q.nu * q.sigma2 * std::pow(kappa2_, q.nu);
  // (kappa^2 + r^2)^-(1+nu) = sum_j binom(-(1+nu), j) kappa^(2j) r^(-2-2nu-2j)
  const double p = 1.0 + q.nu;
  double coef = 1.0;
  for (int j = 0; j < kMaternTailTerms; ++j) {
    if (j > 0) coef *= -(p + j - 1.0) / j * kappa2_;
    tail_coef_.push_back(coef);
    tails_.emplace_back(2.0 * p + 2.0 * j, trunc);
  }
}

double LatticeSpectrum::operator()(double l1, double l2) const {
  check_torus_point(l1, l2);
  double direct = 0.0;
  if (power_law_) {
    const double s = 2.0 + 2.0 * pl_.phi2;
    if (l1 == 0.0 && l2 == 0.0)
      throw std::invalid_argument("lattice_spectrum: power-law spectrum diverges at 0");
    for (int k1 = -trunc_; k1 <= trunc_; ++k1)
      for (int k2 = -trunc_; k2 <= trunc_; ++k2) {
        const double u1 = l1 + kTwoPi * k1;
        const double u2 = l2 + kTwoPi * k2;
        direct += std::pow(u1 * u1 + u2 * u2, -0.5 * s);
      }
  } else {
    const double p = 1.0 + mat_.nu;
    for (int k1 = -trunc_; k1 <= trunc_; ++k1)
      for (int k2 = -trunc_; k2 <= trunc_; ++k2) {
        const double u1 = l1 + kTwoPi * k1;
        const double u2 = l2 + kTwoPi * k2;
        direct += std::pow(kappa2_ + u1 * u1 + u2 * u2, -p);
      }
  }
  double tail = 0.0;
  for (std::size_t i = 0; i < tails_.size(); ++i) tail += tail_coef_[i] * tails_[i](l1, l2);
  return base_ * (direct + tail);
}

double aliased_spectrum(double l1, double l2, const LatticeSpectrum& spec) {
  return spec(l1, l2);
}

double periodized_partial_sum(double l1, double l2, double s, int trunc) {
  check_torus_point(l1, l2);
  if (!(s > 2.0)) throw std::invalid_argument("lattice_spectrum: exponent must exceed 2");
  if (l1 == 0.0 && l2 == 0.0)
    throw std::invalid_argument("lattice_spectrum: power sum diverges at 0");
  double tot = 0.0;
  for (int k1 = -trunc; k1 <= trunc; ++k1)
    for (int k2 = -trunc; k2 <= trunc; ++k2) {
      const double u1 = l1 + kTwoPi * k1;
      const double u2 = l2 + kTwoPi * k2;
      tot += std::pow(u1 * u1 + u2 * u2, -0.5 * s);
    }
  return tot;
}

double alias_pole_term(double phi2, int trunc) {
  if (trunc < 1) throw std::invalid_argument("lattice_spectrum: truncation must be >= 1");
  const double s = 2.0 + 2.0 * phi2;
  const double w = kTwoPi * (trunc + kTailRings + 0.5);
  return box_complement_integral(s, w) / (kTwoPi * kTwoPi);
}

}  // namespace rfqv
