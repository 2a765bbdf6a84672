#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rfqv/estimate.hpp"
#include "rfqv/experiment.hpp"
#include "rfqv/fieldsim.hpp"
#include "rfqv/filters.hpp"
#include "rfqv/gcmodel.hpp"
#include "rfqv/rng.hpp"

using namespace rfqv;

namespace {
Grid random_grid(int n, std::uint64_t key) {
  Grid g(n);
  Rng rng(key);
  for (double& v : g.v) v = rng.next_normal();
  return g;
}

Grid power_law_field(int n, double phi2, std::uint64_t key) {
  const AnchoredSampler s(n, {1.0, phi2}, 0);
  Rng rng = Rng::from(key, kStreamValues, 0);
  return s.draw(rng);
}

long ulps(double a, double b) {
  const auto ia = std::bit_cast<std::int64_t>(a);
  const auto ib = std::bit_cast<std::int64_t>(b);
  return std::labs(ia - ib);
}
}  // namespace

TEST_CASE("moment estimates are invariant under power-of-two rescaling") {
  const Grid x = power_law_field(20, 0.7, 44);
  Grid y = x;
  for (double& v : y.v) v *= 4.0;

  const MomEstimate base = mom_estimate(x, 1, TrimMode::common);
  const MomEstimate scaled = mom_estimate(y, 1, TrimMode::common);
  REQUIRE(base.phi1_hat.has_value());
  CHECK(scaled.phi2_hat == base.phi2_hat);  // bitwise: the ratio is unchanged
  CHECK(*scaled.phi1_hat == 16.0 * *base.phi1_hat);

  const MomEstimate lap = laplacian_estimate(x);
  const MomEstimate lap_scaled = laplacian_estimate(y);
  CHECK(lap_scaled.phi2_hat == lap.phi2_hat);
}

TEST_CASE("moment estimate coincides with its pre-filtered form") {
  const Grid x = random_grid(18, 9);
  for (int m : {1, 2}) {
    const MomEstimate a = mom_estimate(x, m, TrimMode::per_step);
    const MomEstimate b = mom_estimate_filtered(apply_filter(x, m, 1), x.n, m,
                                                TrimMode::per_step);
    CHECK(a.phi2_hat == b.phi2_hat);
    CHECK(a.qv.q1 == b.qv.q1);
    CHECK(a.qv.q2 == b.qv.q2);
  }
}

TEST_CASE("domain flags distinguish smooth, flat, and regular fields") {
  // bilinear surface: the order-1 filter returns the constant j^2, so the
  // two-scale ratio is exactly 16 and the roughness estimate hits 2
  Grid smooth(20);
  for (int t1 = 0; t1 < 20; ++t1)
    for (int t2 = 0; t2 < 20; ++t2) smooth.at(t1, t2) = t1 * t2;
  const MomEstimate s = mom_estimate(smooth, 1, TrimMode::common);
  CHECK(s.phi2_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.out_of_domain);
  CHECK_FALSE(s.phi1_hat.has_value());
  CHECK_FALSE(s.degenerate);

  const MomEstimate flat = mom_estimate(Grid(20), 1, TrimMode::common);
  CHECK(flat.degenerate);
  CHECK_FALSE(flat.phi1_hat.has_value());

  const MomEstimate ok = mom_estimate(power_law_field(24, 0.5, 5), 1, TrimMode::common);
  CHECK_FALSE(ok.out_of_domain);
  CHECK(ok.phi1_hat.has_value());
}

TEST_CASE("laplacian estimator tracks the roughness on a sampled field") {
  const Grid x = power_law_field(32, 0.5, 81);
  const MomEstimate lap = laplacian_estimate(x);
  CHECK(lap.phi2_hat == doctest::Approx(0.5).epsilon(0.35));
  const QvStats qv = laplacian_variations(x);
  CHECK(qv.m1 == 30L * 30L);
  CHECK(qv.m2 == 28L * 28L);
}

TEST_CASE("fixed-domain view aliases the roughness and rescales the amplitude") {
  const int n = 24;
  const double phi2 = 0.5;
  const Grid x = power_law_field(n, phi2, 7);
  const MomEstimate e = mom_estimate(x, 1, TrimMode::common);
  REQUIRE(e.phi1_hat.has_value());
  const FdView fd = fd_view(e, 1.0, phi2);
  CHECK(std::bit_cast<std::uint64_t>(fd.tau2_hat) ==
        std::bit_cast<std::uint64_t>(e.phi2_hat));
  REQUIRE(fd.tau1_hat.has_value());
  CHECK(ulps(*fd.tau1_hat, std::pow(n, -2.0 * phi2) * *e.phi1_hat) <= 4);
  REQUIRE(fd.log_rescaled.has_value());
  const double expect_log =
      std::log(*e.phi1_hat) + 2.0 * std::log(n) * (e.phi2_hat - phi2);
  CHECK(*fd.log_rescaled == doctest::Approx(expect_log).epsilon(1e-12));
  REQUIRE(fd.w_stat.has_value());
  CHECK(*fd.w_stat == doctest::Approx(std::exp(expect_log) - 1.0).epsilon(1e-10));
}

TEST_CASE("empirical variogram averages both axes") {
  Grid g(4);
  // values laid out so axis-1 and axis-2 increments differ
  int v = 0;
  for (int t1 = 0; t1 < 4; ++t1)
    for (int t2 = 0; t2 < 4; ++t2) g.at(t1, t2) = (v++ % 5);
  double acc = 0.0;
  long cnt = 0;
  for (int t1 = 0; t1 < 4; ++t1)
    for (int t2 = 0; t2 < 3; ++t2) {
      const double d = g.at(t1, t2 + 1) - g.at(t1, t2);
      acc += d * d;
      ++cnt;
    }
  for (int t1 = 0; t1 < 3; ++t1)
    for (int t2 = 0; t2 < 4; ++t2) {
      const double d = g.at(t1 + 1, t2) - g.at(t1, t2);
      acc += d * d;
      ++cnt;
    }
  CHECK(empirical_variogram(g, 1) == doctest::Approx(0.5 * acc / cnt).epsilon(1e-14));
}

TEST_CASE("whittle spectral shape table interpolates to high accuracy") {
  const WhittleSpectrumTable table(24);
  for (double phi2 : {0.11, 0.5, 0.89}) {
    CHECK(table.interpolation_error(phi2) <= 1e-8);
  }
  CHECK(table.window_side() == 22);
}

TEST_CASE("whittle fit filters internally and tolerates rescaling") {
  const Grid x = power_law_field(32, 0.5, 19);
  const WhittleSpectrumTable table(32);
  const WhittleFit direct = table.fit(x);
  const WhittleFit pre = table.fit_filtered(apply_filter(x, 1, 1));
  CHECK(direct.phi2_hat == pre.phi2_hat);
  CHECK(direct.phi1_hat == pre.phi1_hat);
  CHECK(direct.used_frequencies == pre.used_frequencies);

  Grid y = x;
  for (double& v : y.v) v *= 4.0;
  const WhittleFit scaled = table.fit(y);
  // the profiled objective only shifts by a constant, so the minimizer moves
  // at most by optimizer noise
  CHECK(scaled.phi2_hat == doctest::Approx(direct.phi2_hat).epsilon(2e-4));
  CHECK(scaled.phi1_hat == doctest::Approx(16.0 * direct.phi1_hat).epsilon(1e-3));

  CHECK(direct.phi2_hat == doctest::Approx(0.5).epsilon(0.4));
}

TEST_CASE("batch likelihood grid matches the single-field path") {
  const int n = 20;
  RemlOptions opt;
  const RemlGridEstimator grid(n, opt);
  std::vector<Grid> d1s;
  std::vector<RemlFit> single;
  for (std::uint64_t k : {3ULL, 4ULL}) {
    const Grid x = power_law_field(n, 0.5, k);
    d1s.push_back(apply_filter(x, 1, 1));
    single.push_back(reml_estimate(x, opt));
  }
  const std::vector<RemlFit> batch = grid.fit_all(d1s);
  REQUIRE(batch.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(batch[i].phi2_hat == doctest::Approx(single[i].phi2_hat).epsilon(5e-3));
  }
  CHECK(grid.fisher_sd(0.5) > 0.0);
  CHECK(grid.fisher_sd(0.5) < 1.0);
}

TEST_CASE("likelihood window dimension is capped") {
  CHECK_THROWS_AS(RemlGridEstimator(60), std::invalid_argument);
  CHECK_NOTHROW(RemlGridEstimator(50));
}

TEST_CASE("likelihood estimate is invariant under power-of-two rescaling") {
  // the window vector is normalized by its mean square before the likelihood
  // is evaluated, so a power-of-two rescaling reproduces the optimization
  // path bit for bit and only moves the profiled amplitude
  const Grid x = power_law_field(20, 0.5, 23);
  Grid y = x;
  for (double& v : y.v) v *= 4.0;
  const RemlFit a = reml_estimate(x);
  const RemlFit b = reml_estimate(y);
  CHECK(b.phi2_hat == a.phi2_hat);
  CHECK(b.phi1_hat == doctest::Approx(16.0 * a.phi1_hat).epsilon(1e-12));
}
