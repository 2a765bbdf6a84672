#include <cmath>
#include <stdexcept>

#include "rfqv/dft.hpp"
#include "rfqv/estimate.hpp"
#include "rfqv/gcmodel.hpp"
#include "rfqv/lattice_spectrum.hpp"
#include "rfqv/optimize.hpp"

namespace rfqv {
namespace {

double cheb_eval(const double* a, int terms, double x) {
  // Clenshaw recurrence for sum_j a_j T_j(x), a_0 stored unhalved.
  double b1 = 0.0, b2 = 0.0;
  for (int j = terms - 1; j >= 1; --j) {
    const double b0 = 2.0 * x * b1 - b2 + a[j];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + a[0];
}

}  // namespace

WhittleSpectrumTable::WhittleSpectrumTable(int n_raw, const WhittleOptions& opt)
    : n_raw_(n_raw), side_(n_raw - 2 * opt.m), opt_(opt) {
  if (opt.m < 1) throw std::invalid_argument("whittle: order m must be >= 1");
  if (side_ < 3) throw std::invalid_argument("whittle: grid side too small for the window");
  if (!(opt.edge > 0.0) || !(opt.edge < 0.5 * opt.m))
    throw std::invalid_argument("whittle: bad search edge");
  if (opt.cheb_nodes < 4) throw std::invalid_argument("whittle: need at least 4 nodes");

  const double pi = std::acos(-1.0);
  const double two_pi = 2.0 * pi;
  const double gmax = std::pow(16.0, opt.m);
  for (int k1 = 0; k1 < side_; ++k1)
    for (int k2 = 0; k2 < side_; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      double l1 = two_pi * k1 / side_;
      double l2 = two_pi * k2 / side_;
      if (l1 > pi) l1 -= two_pi;
      if (l2 > pi) l2 -= two_pi;
      const double gsq = symbol_g_sq(opt.m, 1, l1, l2);
      if (gsq < opt.mask_rel * gmax) continue;
      kept_.push_back(static_cast<long>(k1) * side_ + k2);
      g_sq_.push_back(gsq);
      sum_log_gsq_ += std::log(gsq);
      l1_.push_back(l1);
      l2_.push_back(l2);
    }
  if (kept_.empty()) throw std::invalid_argument("whittle: mask removed every frequency");

  // Chebyshev coefficients of log G per kept frequency, G the pole-free
  // spectral shape, sampled at the usual cosine nodes over the search range.
  const int t = opt.cheb_nodes;
  const double lo = opt.edge, hi = opt.m - opt.edge;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  std::vector<double> node_vals(kept_.size() * static_cast<std::size_t>(t));
  for (int node = 0; node < t; ++node) {
    const double xc = std::cos(pi * (node + 0.5) / t);
    const double phi2 = mid + half * xc;
    const LatticeSpectrum spec(PowerLawParams{1.0, phi2}, opt.truncation);
    const double c = spectral_const(phi2);
    const double pole = alias_pole_term(phi2, opt.truncation);
    for (std::size_t i = 0; i < kept_.size(); ++i) {
      const double g = spec(l1_[i], l2_[i]) / c - pole;
      if (!(g > 0.0))
        throw std::runtime_error("whittle: spectral shape went non-positive while tabulating");
      node_vals[i * static_cast<std::size_t>(t) + node] = std::log(g);
    }
  }
  cheb_.assign(kept_.size() * static_cast<std::size_t>(t), 0.0);
  for (std::size_t i = 0; i < kept_.size(); ++i)
    for (int j = 0; j < t; ++j) {
      double acc = 0.0;
      for (int node = 0; node < t; ++node)
        acc += node_vals[i * static_cast<std::size_t>(t) + node] *
               std::cos(pi * j * (node + 0.5) / t);
      cheb_[i * static_cast<std::size_t>(t) + j] = (j == 0 ? 1.0 : 2.0) * acc / t;
    }
}

double WhittleSpectrumTable::objective(double phi2, const std::vector<double>& periodogram,
                                       double* phi1_out) const {
  const int t = opt_.cheb_nodes;
  const double lo = opt_.edge, hi = opt_.m - opt_.edge;
  const double x = (2.0 * phi2 - (lo + hi)) / (hi - lo);
  const double c = spectral_const(phi2);
  const double pole = alias_pole_term(phi2, opt_.truncation);

  double ratio_sum = 0.0;
  double log_shape_sum = 0.0;
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    const double g = std::exp(cheb_eval(&cheb_[i * static_cast<std::size_t>(t)], t, x));
    const double shape = g + pole;
    log_shape_sum += std::log(shape);
    ratio_sum += periodogram[i] / (g_sq_[i] * shape);
  }
  const double count = static_cast<double>(kept_.size());
  const double phi1 = ratio_sum / (c * count);
  if (phi1_out) *phi1_out = phi1;
  return count * (std::log(phi1) + 1.0) + count * std::log(c) + sum_log_gsq_ + log_shape_sum;
}

WhittleFit WhittleSpectrumTable::fit_filtered(const Grid& d1) const {
  if (d1.n != n_raw_ - opt_.m)
    throw std::invalid_argument("whittle: filtered grid side does not match the table");
  Grid y(side_);
  double msq = 0.0;
  for (int t1 = 0; t1 < side_; ++t1)
    for (int t2 = 0; t2 < side_; ++t2) msq += d1.at(t1, t2) * d1.at(t1, t2);
  msq /= static_cast<double>(side_) * side_;
  if (!(msq > 0.0)) throw std::invalid_argument("whittle: degenerate (constant) window");
  const double scale = std::sqrt(msq);
  for (int t1 = 0; t1 < side_; ++t1)
    for (int t2 = 0; t2 < side_; ++t2) y.at(t1, t2) = d1.at(t1, t2) / scale;

  const std::vector<double> power = dft2_power(y);
  const double window_sites = static_cast<double>(side_) * side_;
  std::vector<double> periodogram(kept_.size());
  for (std::size_t i = 0; i < kept_.size(); ++i)
    periodogram[i] = power[static_cast<std::size_t>(kept_[i])] / window_sites;

  const auto obj = [&](double p) { return objective(p, periodogram, nullptr); };
  const MinimizeResult r =
      minimize_scan_brent(obj, opt_.edge, opt_.m - opt_.edge, opt_.scan_step, opt_.brent_tol);

  WhittleFit fit;
  fit.phi2_hat = r.x;
  double phi1_norm = 0.0;
  fit.objective = objective(r.x, periodogram, &phi1_norm);
  fit.phi1_hat = msq * phi1_norm;
  fit.used_frequencies = static_cast<long>(kept_.size());
  return fit;
}

WhittleFit WhittleSpectrumTable::fit(const Grid& x) const {
  if (x.n != n_raw_) throw std::invalid_argument("whittle: grid side does not match the table");
  return fit_filtered(apply_filter(x, opt_.m, 1));
}

double WhittleSpectrumTable::interpolation_error(double phi2) const {
  const int t = opt_.cheb_nodes;
  const double lo = opt_.edge, hi = opt_.m - opt_.edge;
  if (!(phi2 > lo) || !(phi2 < hi))
    throw std::invalid_argument("whittle: probe point outside the tabulated range");
  const double x = (2.0 * phi2 - (lo + hi)) / (hi - lo);
  const LatticeSpectrum spec(PowerLawParams{1.0, phi2}, opt_.truncation);
  const double c = spectral_const(phi2);
  const double pole = alias_pole_term(phi2, opt_.truncation);
  double worst = 0.0;
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    const double exact = spec(l1_[i], l2_[i]) / c - pole;
    const double tab = std::exp(cheb_eval(&cheb_[i * static_cast<std::size_t>(t)], t, x));
    worst = std::max(worst, std::abs(tab - exact) / exact);
  }
  return worst;
}

WhittleFit whittle_estimate(const Grid& x, const WhittleOptions& opt) {
  const WhittleSpectrumTable table(x.n, opt);
  return table.fit(x);
}

}  // namespace rfqv
