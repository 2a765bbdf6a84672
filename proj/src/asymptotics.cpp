#include <cmath>
#include <stdexcept>

#include "rfqv/asymptotics.hpp"
#include "rfqv/lattice_spectrum.hpp"
#include "rfqv/quadrature.hpp"

namespace rfqv {
namespace {

struct SigmaIntegrand {
  const LatticeSpectrum& spec;
  int m;

  // Returns (F^2, B F^2, B^2 F^2) at l, F = |g|^2 f_lat.
  void eval(double l1, double l2, double out[3]) const {
    const double f = symbol_g_sq(m, 1, l1, l2) * spec(l1, l2);
    const double b = symbol_b(m, l1, l2);
    const double f2 = f * f;
    out[0] = f2;
    out[1] = b * f2;
    out[2] = b * b * f2;
  }
};

void add_rect(const SigmaIntegrand& ig, const GaussLegendre& gl, double x0, double x1, double y0,
              double y1, double acc[3]) {
  const double hx = 0.5 * (x1 - x0), cx = 0.5 * (x1 + x0);
  const double hy = 0.5 * (y1 - y0), cy = 0.5 * (y1 + y0);
  double val[3];
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    const double x = cx + hx * gl.x[i];
    const double wx = gl.w[i] * hx;
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      const double y = cy + hy * gl.x[j];
      const double w = wx * gl.w[j] * hy;
      ig.eval(x, y, val);
      acc[0] += w * val[0];
      acc[1] += w * val[1];
      acc[2] += w * val[2];
    }
  }
}

}  // namespace

Eigen::Matrix2d asymptotic_sigma(int m, const PowerLawParams& p, const QuadSpec& spec) {
  p.validate();
  // Near the origin |g_m|^2 f ~ (l1 l2)^(2m) |l|^(-2-2phi2); the squared
  // integrand is integrable iff phi2 < 2m - 1/2.
  if (!(p.phi2 < 2.0 * m - 0.5))
    throw std::invalid_argument(
        "asymptotics: limit covariance diverges unless phi2 < 2m - 1/2");
  const LatticeSpectrum lat(p, spec.truncation);
  const SigmaIntegrand ig{lat, m};
  const GaussLegendre gl = gauss_legendre(spec.gl_points);
  const double pi = std::acos(-1.0);

  // First quadrant of [-pi,pi]^2 tiled by dyadic L-shaped annuli toward 0;
  // the integrand is symmetric under sign flips of each coordinate.
  double acc[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < spec.levels; ++k) {
    const double a = pi / std::pow(2.0, k);
    add_rect(ig, gl, 0.5 * a, a, 0.0, a, acc);
    add_rect(ig, gl, 0.0, 0.5 * a, 0.5 * a, a, acc);
  }

  const double norm = 2.0 * 4.0 / (4.0 * pi * pi);
  Eigen::Matrix2d sigma;
  sigma(0, 0) = norm * acc[0];
  sigma(0, 1) = sigma(1, 0) = norm * acc[1];
  sigma(1, 1) = norm * acc[2];
  return sigma;
}

std::array<double, 2> asymptotic_q(int m, const PowerLawParams& p) {
  const double base = p.phi1 * a_m(m, p.phi2);
  return {base, base * std::pow(4.0, p.phi2)};
}

Eigen::Matrix2d delta_jacobian(double q1, double q2, int m) {
  if (!(q1 > 0.0) || !(q2 > 0.0))
    throw std::invalid_argument("asymptotics: variations must be positive for the delta method");
  const double s = 1.0 / (2.0 * std::log(2.0));
  const double phi2 = s * std::log(q2 / q1);
  if (!(phi2 > 0.0) || !(phi2 < static_cast<double>(m)))
    throw std::invalid_argument("asymptotics: implied smoothness outside (0, m)");
  const double a = a_m(m, phi2);
  const double ap = a_m_prime(m, phi2);
  Eigen::Matrix2d j;
  j(0, 0) = 1.0 / a + s * ap / (a * a);
  j(0, 1) = -s * (ap / (a * a)) * (q1 / q2);
  j(1, 0) = -s / q1;
  j(1, 1) = s / q2;
  return j;
}

CovPrediction estimator_cov(int n, int m, const ModelSpec& model, TrimMode mode,
                            PredictionKind kind, const QuadSpec& spec) {
  CovPrediction cp;
  cp.kind = kind;
  cp.n = n;
  cp.m = m;
  cp.trim = mode;

  std::array<double, 2> q{};
  Eigen::Matrix2d cov;
  switch (kind) {
    case PredictionKind::finite_window: {
      cov = finite_cov_qq(n, m, model, mode, &q);
      const int w1 = n - 2 * m;
      cp.scale = static_cast<double>(w1) * w1;
      cp.sigma_qq = cp.scale * cov;
      break;
    }
    case PredictionKind::torus: {
      cov = torus_cov_qq(n, m, model, spec.truncation, &q);
      cp.scale = static_cast<double>(n) * n;
      cp.sigma_qq = cp.scale * cov;
      break;
    }
    case PredictionKind::asymptotic: {
      const PowerLawParams p =
          model.kind == ModelSpec::Kind::power_law ? model.pl : tangent_powerlaw(model.mat).tangent;
      q = asymptotic_q(m, p);
      cp.sigma_qq = asymptotic_sigma(m, p, spec);
      cp.scale = 0.0;
      break;
    }
  }
  cp.q1 = q[0];
  cp.q2 = q[1];
  cp.jacobian = delta_jacobian(cp.q1, cp.q2, m);
  cp.omega = cp.jacobian * cp.sigma_qq * cp.jacobian.transpose();
  const double s = 1.0 / (2.0 * std::log(2.0));
  const double phi1_implied = cp.q1 / a_m(m, s * std::log(cp.q2 / cp.q1));
  const Eigen::Matrix2d k = Eigen::Vector2d(1.0 / phi1_implied, 1.0).asDiagonal() * cp.jacobian;
  cp.omega_rel = k * cp.sigma_qq * k.transpose();
  return cp;
}

FdPrediction fd_prediction(const CovPrediction& cp) {
  if (cp.n < 2)
    throw std::invalid_argument("asymptotics: fractal-dimension transfer needs a finite lattice");
  FdPrediction fd;
  fd.log_sites = 2.0 * std::log(static_cast<double>(cp.n));
  fd.stabilized = cp.omega_rel;
  // The rescaled FD log-amplitude log(N^tau2_hat tau1_hat) equals
  // log phi1_hat + L (phi2_hat - phi2), so its covariance with phi2_hat is
  // omega_rel pushed through A = [[1, L], [0, 1]]. The near-unit correlation
  // of that pair is the FD degeneracy; undoing A restores omega_rel.
  Eigen::Matrix2d a;
  a << 1.0, fd.log_sites, 0.0, 1.0;
  fd.unstabilized = a * cp.omega_rel * a.transpose();
  fd.corr_unstabilized =
      fd.unstabilized(0, 1) / std::sqrt(fd.unstabilized(0, 0) * fd.unstabilized(1, 1));
  return fd;
}

std::array<double, 2> matern_filtered_means(const MaternParams& q, int n, int m) {
  q.validate();
  if (n < 1) throw std::invalid_argument("asymptotics: lattice side must be positive");
  MaternParams scaled = q;
  scaled.rho = q.rho * n;  // C(r/n) under the original scale
  const ModelSpec model = ModelSpec::matern(scaled);
  return {filtered_cov(0.0, 0.0, m, 1, model), filtered_cov(0.0, 0.0, m, 2, model)};
}

}  // namespace rfqv
