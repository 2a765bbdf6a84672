#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfqv/dft.hpp"
#include "rfqv/estimate.hpp"
#include "rfqv/experiment.hpp"
#include "rfqv/fieldsim.hpp"
#include "rfqv/filters.hpp"
#include "rfqv/gcmodel.hpp"
#include "rfqv/lattice_spectrum.hpp"
#include "rfqv/rng.hpp"

using namespace rfqv;

namespace {
Grid random_grid(int n, std::uint64_t key) {
  Grid g(n);
  Rng rng(key);
  for (double& v : g.v) v = rng.next_normal();
  return g;
}
}  // namespace

TEST_CASE("stencil weights are signed binomial products") {
  const Stencil s1 = Stencil::make(1, 1);
  CHECK(s1.coeff(0, 0) == 1);
  CHECK(s1.coeff(0, 1) == -1);
  CHECK(s1.coeff(1, 0) == -1);
  CHECK(s1.coeff(1, 1) == 1);
  CHECK(s1.abs_sum() == 4);

  const Stencil s2 = Stencil::make(2, 1);
  CHECK(s2.abs_sum() == 16);
  CHECK(s2.sq_sum() == 36);
  CHECK(s2.coeff(1, 1) == 4);
  CHECK(s2.coeff(1, 0) == -2);
}

TEST_CASE("frequency symbols agree with their squared moduli") {
  for (auto [l1, l2] : {std::pair<double, double>{0.3, -1.1}, {2.0, 0.7}}) {
    for (int m : {1, 2}) {
      for (int j : {1, 2}) {
        CHECK(symbol_g_sq(m, j, l1, l2) ==
              doctest::Approx(std::norm(symbol_g(m, j, l1, l2))).epsilon(1e-12));
      }
      CHECK(symbol_b(m, l1, l2) ==
            doctest::Approx(std::norm(symbol_h(m, l1, l2))).epsilon(1e-12));
    }
  }
}

TEST_CASE("step-2 filtering factors exactly through the block sum") {
  for (int m : {1, 2}) {
    const Grid x = random_grid(17, 99 + m);
    const Grid d2 = apply_filter(x, m, 2);
    const Grid via = block_sum(apply_filter(x, m, 1), m);
    REQUIRE(d2.n == via.n);
    for (long i = 0; i < d2.size(); ++i) CHECK(d2.v[i] == via.v[i]);
  }
}

TEST_CASE("filter of an impulse reproduces the stencil") {
  const int n = 9, m = 2;
  Grid x(n);
  x.at(4, 4) = 1.0;
  const Grid d1 = apply_filter(x, m, 1);
  const Stencil st = Stencil::make(m, 1);
  // anchor t sees x(t + a), so the impulse shows up reversed
  for (int a1 = 0; a1 <= m; ++a1)
    for (int a2 = 0; a2 <= m; ++a2)
      CHECK(d1.at(4 - a1, 4 - a2) == static_cast<double>(st.coeff(a1, a2)));
  CHECK(d1.at(0, 0) == 0.0);
}

TEST_CASE("window conventions give the documented counts") {
  const Grid x = random_grid(16, 5);
  const QvStats per = quadratic_variations(x, 1, TrimMode::per_step);
  CHECK(per.m1 == 14L * 14L);
  CHECK(per.m2 == 12L * 12L);
  const QvStats com = quadratic_variations(x, 1, TrimMode::common);
  CHECK(com.m1 == 14L * 14L);
  CHECK(com.m2 == 14L * 14L);
  CHECK_FALSE(per.degenerate);

  const QvStats flat = quadratic_variations(Grid(16), 1, TrimMode::common);
  CHECK(flat.degenerate);
}

TEST_CASE("quadratic variations scale exactly under power-of-two dilation") {
  Grid x = random_grid(14, 3);
  const QvStats base = quadratic_variations(x, 2, TrimMode::per_step);
  for (double& v : x.v) v *= 4.0;
  const QvStats scaled = quadratic_variations(x, 2, TrimMode::per_step);
  CHECK(scaled.q1 == 16.0 * base.q1);
  CHECK(scaled.q2 == 16.0 * base.q2);
}

TEST_CASE("explicit filter matrices factor and reproduce the statistics") {
  const int n = 12;
  for (int m : {1, 2}) {
    const FilterMatrix f1 = build_filter_matrix(n, m, 1);
    const FilterMatrix f2 = build_filter_matrix(n, m, 2);
    const Eigen::SparseMatrix<double> prod = block_sum_matrix(n, m) * f1.f;
    CHECK((Eigen::MatrixXd(f2.f) - Eigen::MatrixXd(prod)).norm() == 0.0);

    const Grid x = random_grid(n, 21 + m);
    const QvStats qv = quadratic_variations(x, m, TrimMode::per_step);
    const Eigen::Map<const Eigen::VectorXd> xv(x.v.data(), x.size());
    const Eigen::VectorXd r1 = f1.f * xv;
    const Eigen::VectorXd r2 = f2.f * xv;
    CHECK(r1.squaredNorm() / f1.rows() == doctest::Approx(qv.q1).epsilon(1e-13));
    CHECK(r2.squaredNorm() / f2.rows() == doctest::Approx(qv.q2).epsilon(1e-13));

    // x^T B x on the step-1 window equals alpha Q1 + beta Q2
    const int w = n - 2 * m;
    const Grid d1 = apply_filter(x, m, 1);
    Eigen::VectorXd win(static_cast<long>(w) * w);
    for (int t1 = 0; t1 < w; ++t1)
      for (int t2 = 0; t2 < w; ++t2) win[static_cast<long>(t1) * w + t2] = d1.at(t1, t2);
    const Eigen::SparseMatrix<double> b = assemble_B(0.7, -0.2, n, m);
    CHECK(win.dot(b * win) == doctest::Approx(0.7 * qv.q1 - 0.2 * qv.q2).epsilon(1e-12));
  }
}

TEST_CASE("dense sampler reproduces a two-by-two covariance") {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 1.0, 1.0, 2.0;
  const GaussianSampler gs(cov);
  CHECK(gs.applied_ridge() == 0.0);
  Rng rng(31);
  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    const Eigen::VectorXd z = gs.draw(rng);
    s11 += z[0] * z[0];
    s12 += z[0] * z[1];
    s22 += z[1] * z[1];
  }
  CHECK(s11 / reps == doctest::Approx(2.0).epsilon(0.04));
  CHECK(s12 / reps == doctest::Approx(1.0).epsilon(0.08));
  CHECK(s22 / reps == doctest::Approx(2.0).epsilon(0.04));

  Rng r1(77), r2(77);
  CHECK(gs.draw(r1) == gs.draw(r2));
}

TEST_CASE("anchored covariance pins the origin and matches the variogram rule") {
  const PowerLawParams p{1.0, 0.5};
  const int n = 6;
  const Eigen::MatrixXd c = anchored_cov_matrix(n, p, 0);
  // Cov(X(s), X(t)) = gamma(s) + gamma(t) - gamma(s - t), X(0) = 0
  CHECK(c(0, 0) == 0.0);
  const auto idx = [n](int t1, int t2) { return static_cast<long>(t1) * n + t2; };
  const auto gam = [&](double h1, double h2) {
    return semivariogram_powerlaw(std::hypot(h1, h2), p);
  };
  CHECK(c(idx(0, 1), idx(0, 1)) == doctest::Approx(7.0898154036220634).epsilon(1e-12));
  CHECK(c(idx(2, 1), idx(1, 3)) ==
        doctest::Approx(gam(2, 1) + gam(1, 3) - gam(1, -2)).epsilon(1e-12));

  const Eigen::MatrixXd c1 = anchored_cov_matrix(n, {1.0, 1.5}, 1);
  for (long a : {idx(0, 0), idx(1, 0), idx(0, 1)}) {
    CHECK(c1.row(a).norm() == 0.0);
    CHECK(c1.col(a).norm() == 0.0);
  }
}

TEST_CASE("anchored draws carry exact zeros and plausible increments") {
  const AnchoredSampler s(24, {1.0, 0.5}, 0);
  Rng rng = Rng::from(2024, kStreamValues, 0);
  const Grid x = s.draw(rng);
  CHECK(x.at(0, 0) == 0.0);
  CHECK(x.at(5, 7) != 0.0);
  // one-field variogram estimate at lag 1 is a rough but bounded quantity
  const double g1 = empirical_variogram(x, 1);
  CHECK(g1 > 1.8);
  CHECK(g1 < 6.0);
}

TEST_CASE("filtered covariance matrix tabulates the kernel sums") {
  const ModelSpec model = ModelSpec::power_law({1.0, 0.7});
  const int n = 8, m = 1;
  const Eigen::MatrixXd c = filtered_cov_matrix(n, m, model);
  const int side = n - m;
  REQUIRE(c.rows() == static_cast<long>(side) * side);
  const auto idx = [side](int t1, int t2) { return static_cast<long>(t1) * side + t2; };
  CHECK(c(idx(1, 2), idx(4, 3)) ==
        doctest::Approx(filtered_cov(3, 1, m, 1, model)).epsilon(1e-13));
  CHECK(c(idx(4, 3), idx(1, 2)) == doctest::Approx(c(idx(1, 2), idx(4, 3))).epsilon(1e-13));
}

TEST_CASE("torus covariance is circulant with the intended spectrum") {
  const int n = 12, m = 1;
  const ModelSpec model = ModelSpec::power_law({1.0, 0.5});
  const Eigen::MatrixXd c = torus_filtered_cov_matrix(n, m, model);
  const auto idx = [n](int t1, int t2) { return static_cast<long>(t1) * n + t2; };
  CHECK(c(idx(3, 4), idx(5, 9)) == doctest::Approx(c(idx(0, 0), idx(2, 5))).epsilon(1e-12));
  CHECK(c(idx(0, 0), idx(0, 1)) == doctest::Approx(c(idx(0, 0), idx(0, n - 1))).epsilon(1e-12));

  // the DFT of the first covariance row recovers |g|^2 f_lat at the grid frequencies
  Grid row0(n);
  for (int t1 = 0; t1 < n; ++t1)
    for (int t2 = 0; t2 < n; ++t2) row0.at(t1, t2) = c(idx(0, 0), idx(t1, t2));
  const auto spec = dft2(row0);
  const LatticeSpectrum f_lat(model.pl);
  const double two_pi = 2.0 * std::numbers::pi;
  for (auto [k1, k2] : {std::pair<int, int>{1, 0}, {3, 5}, {6, 6}, {11, 2}}) {
    double l1 = two_pi * k1 / n, l2 = two_pi * k2 / n;
    if (l1 > std::numbers::pi) l1 -= two_pi;
    if (l2 > std::numbers::pi) l2 -= two_pi;
    const double expect = symbol_g_sq(m, 1, l1, l2) * f_lat(l1, l2);
    const std::complex<double> got = spec[static_cast<std::size_t>(k1) * n + k2];
    CHECK(got.real() == doctest::Approx(expect).epsilon(1e-8));
    CHECK(std::abs(got.imag()) < 1e-8 * (1.0 + expect));
  }
}

TEST_CASE("lattice spectrum matches brute-force periodization") {
  // A K-truncated brute double sum still misses an O(1/K) tail, so it only
  // certifies the convention at coarse tolerance; the analytic-tail accuracy
  // itself is certified by truncation invariance below.
  const int big = 400;
  const auto brute = [&](auto f0) {
    return [f0, big](double l1, double l2) {
      double s = 0.0;
      const double two_pi = 2.0 * std::numbers::pi;
      for (int k1 = -big; k1 <= big; ++k1)
        for (int k2 = -big; k2 <= big; ++k2) s += f0(l1 + two_pi * k1, l2 + two_pi * k2);
      return s;
    };
  };

  const PowerLawParams p{1.0, 0.5};
  const LatticeSpectrum sp(p);
  const LatticeSpectrum sp_hi(p, 100);
  const auto brute_pl = brute([&](double w1, double w2) {
    return spectral_density_powerlaw(w1, w2, p);
  });
  for (auto [l1, l2] : {std::pair<double, double>{0.7, -1.1}, {3.1, 3.1}, {0.05, 2.0}}) {
    CHECK(sp(l1, l2) == doctest::Approx(brute_pl(l1, l2)).epsilon(2e-3));
    CHECK(sp(l1, l2) == doctest::Approx(sp_hi(l1, l2)).epsilon(1e-7));
  }

  const MaternParams q{1.0, 1.0, 0.5};
  const LatticeSpectrum sq(q);
  const LatticeSpectrum sq_hi(q, 100);
  const auto brute_mat = brute([&](double w1, double w2) {
    return spectral_density_matern(w1, w2, q);
  });
  for (auto [l1, l2] : {std::pair<double, double>{0.7, -1.1}, {3.1, 3.1}}) {
    CHECK(sq(l1, l2) == doctest::Approx(brute_mat(l1, l2)).epsilon(2e-3));
    CHECK(sq(l1, l2) == doctest::Approx(sq_hi(l1, l2)).epsilon(1e-7));
  }
  CHECK_THROWS((void)sp(0.0, 0.0));  // power-law density diverges at the origin
}

TEST_CASE("binary and csv field files round-trip bitwise") {
  FieldFile f;
  f.grid = random_grid(9, 123);
  f.m = 2;
  f.mode = 3;
  f.seed = 99;
  const std::string stem =
      (std::filesystem::temp_directory_path() / "rfqv_roundtrip_field").string();
  const std::string bin = stem + ".rsf1";
  write_rsf1(bin, f);
  const FieldFile back = read_rsf1(bin);
  CHECK(back.m == f.m);
  CHECK(back.mode == f.mode);
  CHECK(back.seed == f.seed);
  REQUIRE(back.grid.n == f.grid.n);
  CHECK(back.grid.v == f.grid.v);
  std::remove(bin.c_str());

  const std::string csv = stem + ".csv";
  write_field_csv(csv, f.grid);
  const Grid gback = read_field_csv(csv);
  REQUIRE(gback.n == f.grid.n);
  CHECK(gback.v == f.grid.v);
  std::remove(csv.c_str());
}

TEST_CASE("variogram discrepancy lines center on zero across replicates") {
  Fig1Spec spec;  // 25 fields of side 60 at phi2 = 0.8
  const Fig1Result r = run_fig1(spec);
  REQUIRE(r.points.size() == spec.hs.size() * static_cast<std::size_t>(spec.reps));
  CHECK(std::abs(r.mean_slope) <= 3.0 * r.se_slope);
  for (const Fig1Point& pt : r.points) {
    CHECK(pt.log2_h_fd == doctest::Approx(pt.log2_h - std::log2(60.0)).epsilon(1e-12));
    if (pt.h == 1) {
      CHECK(pt.gamma_true ==
            doctest::Approx(semivariogram_powerlaw(1.0, {1.0, 0.8})).epsilon(1e-12));
    }
  }
}
