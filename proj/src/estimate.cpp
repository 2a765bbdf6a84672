#include "rfqv/estimate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rfqv/gcmodel.hpp"

namespace rfqv {
namespace {

bool near_integer(double x, double guard) {
  return std::abs(x - std::round(x)) < guard;
}

MomEstimate assemble(QvFamily family, int n, const QvStats& qv, double admissible_hi) {
  MomEstimate e;
  e.family = family;
  e.n = n;
  e.m = qv.m;
  e.trim = qv.trim_mode;
  e.qv = qv;
  e.degenerate = qv.degenerate;
  if (qv.degenerate) {
    e.phi2_hat = std::numeric_limits<double>::quiet_NaN();
    e.out_of_domain = true;
    return e;
  }
  e.phi2_hat = 0.5 * std::log2(qv.q2 / qv.q1);
  const bool inside = e.phi2_hat > 0.0 && e.phi2_hat < admissible_hi &&
                      !near_integer(e.phi2_hat, kIntegerPoleGuard);
  e.out_of_domain = !inside;
  if (inside) {
    const double a = family == QvFamily::bilinear ? a_m(qv.m, e.phi2_hat)
                                                  : a_laplacian(e.phi2_hat);
    e.phi1_hat = qv.q1 / a;
  }
  return e;
}

}  // namespace

MomEstimate mom_estimate_filtered(const Grid& d1, int n_raw, int m, TrimMode mode) {
  return assemble(QvFamily::bilinear, n_raw, quadratic_variations_filtered(d1, n_raw, m, mode),
                  static_cast<double>(m));
}

MomEstimate mom_estimate(const Grid& x, int m, TrimMode mode) {
  return mom_estimate_filtered(apply_filter(x, m, 1), x.n, m, mode);
}

MomEstimate mom_estimate_torus(const Grid& y, int m) {
  return assemble(QvFamily::bilinear, y.n, torus_quadratic_variations(y, m),
                  static_cast<double>(m));
}

QvStats laplacian_variations(const Grid& x) {
  const int n = x.n;
  if (n < 5) throw std::invalid_argument("estimate: Laplacian steps 1,2 need side >= 5");
  QvStats s;
  s.m = 1;
  s.trim_mode = TrimMode::per_step;
  double acc[2] = {0.0, 0.0};
  for (int j = 1; j <= 2; ++j) {
    const int lo = j, hi = n - 1 - j;
    for (int t1 = lo; t1 <= hi; ++t1)
      for (int t2 = lo; t2 <= hi; ++t2) {
        const double d = x.at(t1 + j, t2) + x.at(t1 - j, t2) + x.at(t1, t2 + j) +
                         x.at(t1, t2 - j) - 4.0 * x.at(t1, t2);
        acc[j - 1] += d * d;
      }
  }
  const long w1 = n - 2, w2 = n - 4;
  s.m1 = w1 * w1;
  s.m2 = w2 * w2;
  s.q1 = acc[0] / static_cast<double>(s.m1);
  s.q2 = acc[1] / static_cast<double>(s.m2);
  s.degenerate = (s.q1 == 0.0 || s.q2 == 0.0);
  return s;
}

MomEstimate laplacian_estimate(const Grid& x) {
  return assemble(QvFamily::laplacian, x.n, laplacian_variations(x), 1.0);
}

FdView fd_view(const MomEstimate& e, double phi1_true, double phi2_true) {
  FdView v;
  v.tau2_hat = e.phi2_hat;
  if (!e.phi1_hat) return v;
  const double nn = static_cast<double>(e.n);
  const double scale = std::pow(nn, -2.0 * phi2_true);
  v.tau1_hat = scale * *e.phi1_hat;
  const double log_sites = 2.0 * std::log(nn);
  v.log_rescaled = std::log(*e.phi1_hat) + log_sites * (e.phi2_hat - phi2_true);
  v.w_stat = std::exp(*v.log_rescaled) / phi1_true - 1.0;
  return v;
}

double empirical_variogram(const Grid& x, int h) {
  if (h < 1 || h >= x.n) throw std::invalid_argument("estimate: variogram lag out of range");
  const int n = x.n;
  double acc = 0.0;
  long pairs = 0;
  for (int t1 = 0; t1 < n; ++t1)
    for (int t2 = 0; t2 + h < n; ++t2) {
      const double d1 = x.at(t1, t2 + h) - x.at(t1, t2);
      const double d2 = x.at(t2 + h, t1) - x.at(t2, t1);
      acc += d1 * d1 + d2 * d2;
      pairs += 2;
    }
  return 0.5 * acc / static_cast<double>(pairs);
}

}  // namespace rfqv
