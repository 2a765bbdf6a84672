#include <cmath>
#include <stdexcept>
#include <vector>

#include "rfqv/asymptotics.hpp"
#include "rfqv/lattice_spectrum.hpp"

namespace rfqv {
namespace {

// Number of ordered pairs (t, s) with t in [0, wj), s in [0, wk), t - s = u.
long pair_count_1d(int wj, int wk, int u) {
  const long lo = std::max(0, -u);
  const long hi = std::min<long>(wk, static_cast<long>(wj) - u);
  return std::max(0L, hi - lo);
}

// Table of filtered cross-covariances r_jk(u) over the needed lag box.
struct CrossCovTable {
  int umin, umax, span;
  std::vector<double> v;
  double at(int u1, int u2) const {
    return v[static_cast<std::size_t>(u1 - umin) * span + (u2 - umin)];
  }
};

CrossCovTable cross_cov_table(int m, int j, int k, int wj, int wk, const ModelSpec& model) {
  CrossCovTable t;
  t.umin = -(wk - 1);
  t.umax = wj - 1;
  t.span = t.umax - t.umin + 1;
  t.v.resize(static_cast<std::size_t>(t.span) * t.span);
  for (int u1 = t.umin; u1 <= t.umax; ++u1)
    for (int u2 = t.umin; u2 <= t.umax; ++u2)
      t.v[static_cast<std::size_t>(u1 - t.umin) * t.span + (u2 - t.umin)] =
          filtered_cross_cov(u1, u2, m, j, k, model);
  return t;
}

double cov_qq_entry(int m, int j, int k, int wj, int wk, const ModelSpec& model) {
  const CrossCovTable t = cross_cov_table(m, j, k, wj, wk, model);
  double acc = 0.0;
  for (int u1 = t.umin; u1 <= t.umax; ++u1) {
    const long n1 = pair_count_1d(wj, wk, u1);
    if (n1 == 0) continue;
    for (int u2 = t.umin; u2 <= t.umax; ++u2) {
      const long n2 = pair_count_1d(wj, wk, u2);
      if (n2 == 0) continue;
      const double r = t.at(u1, u2);
      acc += static_cast<double>(n1) * n2 * r * r;
    }
  }
  const double mj = static_cast<double>(wj) * wj;
  const double mk = static_cast<double>(wk) * wk;
  return 2.0 * acc / (mj * mk);
}

}  // namespace

Eigen::Matrix2d finite_cov_qq(int n, int m, const ModelSpec& model, TrimMode mode,
                              std::array<double, 2>* q_out) {
  if (n > kFiniteCovCap)
    throw std::invalid_argument("asymptotics: exact window covariance is capped at side 128");
  const int w1 = n - 2 * m;
  const int w2 = (mode == TrimMode::per_step) ? n - 4 * m : n - 2 * m;
  if (w2 < 1 || w1 < 1)
    throw std::invalid_argument("asymptotics: grid side too small for both variation windows");

  if (q_out) {
    (*q_out)[0] = filtered_cov(0.0, 0.0, m, 1, model);
    (*q_out)[1] = filtered_cov(0.0, 0.0, m, 2, model);
  }
  Eigen::Matrix2d cov;
  cov(0, 0) = cov_qq_entry(m, 1, 1, w1, w1, model);
  cov(0, 1) = cov(1, 0) = cov_qq_entry(m, 1, 2, w1, w2, model);
  cov(1, 1) = cov_qq_entry(m, 2, 2, w2, w2, model);
  return cov;
}

double trimming_gap_variance(int n, int m, const ModelSpec& model) {
  if (n > kFiniteCovCap)
    throw std::invalid_argument("asymptotics: exact window covariance is capped at side 128");
  const int wa = n - 2 * m;
  const int wb = n - 4 * m;
  if (wb < 1) throw std::invalid_argument("asymptotics: grid side too small for the trimmed window");

  const CrossCovTable t = cross_cov_table(m, 1, 1, wa, wa, model);
  const double ma = static_cast<double>(wa) * wa;
  const double mb = static_cast<double>(wb) * wb;
  double va = 0.0, vb = 0.0, cab = 0.0;
  for (int u1 = t.umin; u1 <= t.umax; ++u1) {
    const long na1 = pair_count_1d(wa, wa, u1);
    const long nb1 = pair_count_1d(wb, wb, u1);
    // Trimmed window sits at offset +m inside the full one.
    const long nab1 = pair_count_1d(wa, wb, u1 + m);
    for (int u2 = t.umin; u2 <= t.umax; ++u2) {
      const double r = t.at(u1, u2);
      const double r2 = r * r;
      va += static_cast<double>(na1) * pair_count_1d(wa, wa, u2) * r2;
      vb += static_cast<double>(nb1) * pair_count_1d(wb, wb, u2) * r2;
      cab += static_cast<double>(nab1) * pair_count_1d(wa, wb, u2 + m) * r2;
    }
  }
  return 2.0 * va / (ma * ma) + 2.0 * vb / (mb * mb) - 2.0 * (2.0 * cab / (ma * mb));
}

Eigen::Matrix2d torus_cov_qq(int n, int m, const ModelSpec& model, int truncation,
                             std::array<double, 2>* q_out) {
  if (n < 2 * m + 1)
    throw std::invalid_argument("asymptotics: torus side too small for the filter order");
  const LatticeSpectrum spec = model.kind == ModelSpec::Kind::power_law
                                   ? LatticeSpectrum(model.pl, truncation)
                                   : LatticeSpectrum(model.mat, truncation);
  const double pi = std::acos(-1.0);
  const double two_pi = 2.0 * pi;
  std::vector<double> lambda(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double l = two_pi * k / n;
    if (l > pi) l -= two_pi;
    lambda[static_cast<std::size_t>(k)] = l;
  }

  const double nsites = static_cast<double>(n) * n;
  double q1 = 0.0, q2 = 0.0, c11 = 0.0, c12 = 0.0, c22 = 0.0;
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < n; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double l1 = lambda[static_cast<std::size_t>(k1)];
      const double l2 = lambda[static_cast<std::size_t>(k2)];
      const double f = symbol_g_sq(m, 1, l1, l2) * spec(l1, l2);
      const double b2 = symbol_b(m, l1, l2);
      q1 += f;
      q2 += b2 * f;
      const double f2 = f * f;
      c11 += f2;
      c12 += b2 * f2;
      c22 += b2 * b2 * f2;
    }
  if (q_out) {
    (*q_out)[0] = q1 / nsites;
    (*q_out)[1] = q2 / nsites;
  }
  Eigen::Matrix2d cov;
  cov(0, 0) = 2.0 * c11 / (nsites * nsites);
  cov(0, 1) = cov(1, 0) = 2.0 * c12 / (nsites * nsites);
  cov(1, 1) = 2.0 * c22 / (nsites * nsites);
  return cov;
}

}  // namespace rfqv
