#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "rfqv/asymptotics.hpp"
#include "rfqv/fieldsim.hpp"
#include "rfqv/gcmodel.hpp"
#include "rfqv/specfun.hpp"

using namespace rfqv;

TEST_CASE("semivariogram and first-order mean constant closed forms") {
  const PowerLawParams p{1.0, 0.5};
  CHECK(semivariogram_powerlaw(1.0, p) ==
        doctest::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(semivariogram_powerlaw(2.0, p) ==
        doctest::Approx(2.0 * semivariogram_powerlaw(1.0, p)).epsilon(1e-13));

  for (double phi2 : {0.1, 0.35, 0.5, 0.75, 0.9}) {
    const double closed = std::abs(gamma_fn(-phi2)) * (8.0 - 4.0 * std::pow(2.0, phi2));
    CHECK(a_m(1, phi2) == doctest::Approx(closed).epsilon(1e-12));
  }
  CHECK(a_m(2, 1.5) > 0.0);
  CHECK(a_laplacian(0.5) > 0.0);
  CHECK_THROWS(a_m(1, 1.0));    // integer pole
  CHECK_THROWS(a_m(1, 1.5));    // out of the order-1 domain
}

TEST_CASE("mean-constant derivative matches central differences") {
  for (auto [m, phi2] : {std::pair<int, double>{1, 0.45}, {2, 1.35}}) {
    const double h = 1e-6;
    const double num = (a_m(m, phi2 + h) - a_m(m, phi2 - h)) / (2.0 * h);
    CHECK(a_m_prime(m, phi2) == doctest::Approx(num).epsilon(1e-6));
  }
}

// Pointwise the power-law kernel diverges at integer phi2 (the gamma factor
// has a pole); the divergent part is an even polynomial, so any annihilating
// stencil restores continuity with the log kernel as the limit.
TEST_CASE("stencil-filtered kernel is continuous across integer phi2") {
  const double phi1 = 1.3;
  const Stencil st = Stencil::make(2, 1);
  const auto brute_integer = [&](double u1, double u2) {
    double s = 0.0;
    for (int a1 = 0; a1 <= 2; ++a1)
      for (int a2 = 0; a2 <= 2; ++a2)
        for (int b1 = 0; b1 <= 2; ++b1)
          for (int b2 = 0; b2 <= 2; ++b2)
            s += st.coeff(a1, a2) * st.coeff(b1, b2) *
                 gc_powerlaw_integer(u1 + b1 - a1, u2 + b2 - a2, phi1, 1);
    return s;
  };
  for (auto [u1, u2] : {std::pair<double, double>{0.0, 0.0}, {1.0, 0.0}, {2.0, 1.0}}) {
    const double at = brute_integer(u1, u2);
    for (double eps : {1e-4, -1e-4}) {
      const ModelSpec near = ModelSpec::power_law({phi1, 1.0 + eps});
      CHECK(filtered_cov(u1, u2, 2, 1, near) == doctest::Approx(at).epsilon(5e-3));
    }
  }
}

TEST_CASE("Matern covariance matches half-integer closed forms") {
  const MaternParams e{1.0, 1.0, 0.5};  // kappa = 1, exponential
  for (double r : {0.1, 0.5, 1.0, 2.5}) {
    CHECK(matern_cov(r, e) == doctest::Approx(std::exp(-r)).epsilon(1e-12));
  }
  const MaternParams m15{2.0, 1.0, 1.5};  // kappa = sqrt(3)
  const double kap = std::sqrt(3.0);
  for (double r : {0.2, 1.0}) {
    CHECK(matern_cov(r, m15) ==
          doctest::Approx(2.0 * (1.0 + kap * r) * std::exp(-kap * r)).epsilon(1e-11));
  }
  CHECK(matern_cov(0.0, m15) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("tangent expansion of the exponential Matern model") {
  const TangentPL t = tangent_powerlaw({1.0, 1.0, 0.5});
  CHECK(t.nu == 0.5);
  CHECK(t.c_mat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.a_mat == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.tangent.phi2 == 0.5);
  CHECK(t.tangent.phi1 ==
        doctest::Approx(1.0 / (2.0 * std::sqrt(std::numbers::pi))).epsilon(1e-12));
  // the expansion reproduces C(0) - C(r) to o(r^2)
  for (double r : {1e-3, 1e-4}) {
    const double gap = 1.0 - matern_cov(r, {1.0, 1.0, 0.5});
    const double expansion = t.c_mat * std::pow(r, 2.0 * t.nu) - t.a_mat * r * r;
    CHECK(gap == doctest::Approx(expansion).epsilon(1e-3 * r));
  }
}

TEST_CASE("power-law spectral density scales like |w|^(-2-2 phi2)") {
  const PowerLawParams p{1.0, 0.5};
  const double f1 = spectral_density_powerlaw(0.4, 0.9, p);
  const double f2 = spectral_density_powerlaw(0.8, 1.8, p);
  CHECK(f2 / f1 == doctest::Approx(std::pow(2.0, -3.0)).epsilon(1e-12));
  CHECK(spectral_density_powerlaw(0.9, 0.4, p) == doctest::Approx(f1).epsilon(1e-12));
  CHECK(spectral_density_powerlaw(1.3, 0.0, {2.0, 0.5}) ==
        doctest::Approx(2.0 * spectral_density_powerlaw(1.3, 0.0, p)).epsilon(1e-12));
}

TEST_CASE("asymptotic moments and limit covariance at the reference point") {
  const PowerLawParams p{1.0, 0.5};
  const std::array<double, 2> q = asymptotic_q(1, p);
  CHECK(q[0] == doctest::Approx(a_m(1, 0.5)).epsilon(1e-14));
  CHECK(q[1] / q[0] == doctest::Approx(2.0).epsilon(1e-14));

  const Eigen::Matrix2d sigma = asymptotic_sigma(1, p);
  CHECK(sigma(0, 0) == doctest::Approx(232.02008).epsilon(1e-4));
  CHECK(sigma(0, 1) == doctest::Approx(257.03556).epsilon(1e-4));
  CHECK(sigma(1, 1) == doctest::Approx(1291.71911).epsilon(1e-4));
  CHECK(sigma(1, 0) == sigma(0, 1));
  CHECK(sigma.determinant() > 0.0);
}

TEST_CASE("moment-map Jacobian rows have their closed forms") {
  const double q1 = 7.3, q2 = 19.1;
  const Eigen::Matrix2d j = delta_jacobian(q1, q2, 1);
  const double ln2 = std::numbers::ln2;
  CHECK(j(1, 0) == doctest::Approx(-1.0 / (2.0 * ln2 * q1)).epsilon(1e-13));
  CHECK(j(1, 1) == doctest::Approx(1.0 / (2.0 * ln2 * q2)).epsilon(1e-13));
}

TEST_CASE("finite-window covariance is symmetric positive definite") {
  const ModelSpec model = ModelSpec::power_law({1.0, 0.5});
  std::array<double, 2> q{};
  const Eigen::Matrix2d c = finite_cov_qq(16, 1, model, TrimMode::common, &q);
  CHECK(q[1] / q[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c(0, 1) == doctest::Approx(c(1, 0)).epsilon(1e-14));
  CHECK(c(0, 0) > 0.0);
  CHECK(c.determinant() > 0.0);
}

TEST_CASE("periodic-field predictions at n=60 match frozen values") {
  // regression freeze of sqrt(N)-scaled sd(phi2_hat) for the order-2 design
  const double expect[3] = {2.3056, 2.2352, 2.1645};
  const double phi2s[3] = {1.2, 1.5, 1.8};
  for (int i = 0; i < 3; ++i) {
    const CovPrediction cp = estimator_cov(60, 2, ModelSpec::power_law({1.0, phi2s[i]}),
                                           TrimMode::common, PredictionKind::torus);
    CHECK(cp.sd_phi2_scaled() == doctest::Approx(expect[i]).epsilon(2e-4));
    CHECK(cp.scale == doctest::Approx(3600.0).epsilon(1e-14));
  }
}

TEST_CASE("fixed-domain reparameterization degenerates while stabilization recovers") {
  const CovPrediction cp = estimator_cov(60, 1, ModelSpec::power_law({1.0, 0.5}),
                                         TrimMode::common, PredictionKind::finite_window);
  const FdPrediction fd = fd_prediction(cp);
  CHECK(fd.log_sites == doctest::Approx(std::log(3600.0)).epsilon(1e-14));
  CHECK(fd.corr_unstabilized == doctest::Approx(0.99300).epsilon(5e-4));
  CHECK(fd.corr_unstabilized > 0.99);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(fd.stabilized(i, j) == doctest::Approx(cp.omega_rel(i, j)).epsilon(1e-12));
  // unstabilized variance of log tau1 carries the log(N)^2 inflation
  CHECK(fd.unstabilized(0, 0) > 10.0 * fd.stabilized(0, 0));
}

TEST_CASE("boundary-trimming gap variance decreases with size") {
  const ModelSpec model = ModelSpec::power_law({1.0, 0.5});
  const double v16 = trimming_gap_variance(16, 1, model);
  const double v24 = trimming_gap_variance(24, 1, model);
  const double v32 = trimming_gap_variance(32, 1, model);
  CHECK(v16 > 0.0);
  CHECK(v24 < v16);
  CHECK(v32 < v24);
}

TEST_CASE("Matern filtered means land near the smoothness parameter") {
  const std::array<double, 2> q = matern_filtered_means({1.0, 1.0, 0.5}, 60, 2);
  CHECK(q[0] > 0.0);
  const double implied_phi2 = 0.5 * std::log2(q[1] / q[0]);
  CHECK(implied_phi2 == doctest::Approx(0.5).epsilon(0.1));
}
