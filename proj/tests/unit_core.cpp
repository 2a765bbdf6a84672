#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <vector>

#include "rfqv/config.hpp"
#include "rfqv/csvio.hpp"
#include "rfqv/dft.hpp"
#include "rfqv/optimize.hpp"
#include "rfqv/quadrature.hpp"
#include "rfqv/rng.hpp"
#include "rfqv/specfun.hpp"

using namespace rfqv;

TEST_CASE("rng streams are pure functions of their key material") {
  Rng a = Rng::from(42, 1, 7);
  Rng b = Rng::from(42, 1, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c = Rng::from(42, 1, 8);
  Rng d = Rng::from(42, 2, 7);
  bool all_equal_c = true, all_equal_d = true;
  Rng a2 = Rng::from(42, 1, 7);
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t v = a2.next_u64();
    all_equal_c = all_equal_c && v == c.next_u64();
    all_equal_d = all_equal_d && v == d.next_u64();
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
}

TEST_CASE("uniform draws avoid the endpoints and have the right scale") {
  Rng rng(123);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    const double u = rng.next_uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / reps == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal quantile matches reference values") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.1) == doctest::Approx(-1.2815515655446004).epsilon(1e-12));
  CHECK(normal_quantile(0.3) == doctest::Approx(-normal_quantile(0.7)).epsilon(1e-13));

  Rng rng(7);
  double s = 0.0, s2 = 0.0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    const double z = rng.next_normal();
    s += z;
    s2 += z * z;
  }
  CHECK(s / reps == doctest::Approx(0.0).epsilon(0.03));
  CHECK(s2 / reps == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("gamma function covers negative non-integer arguments") {
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  CHECK(gamma_fn(0.5) == doctest::Approx(sqrt_pi).epsilon(1e-14));
  CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-14));
  CHECK(gamma_fn(-0.5) == doctest::Approx(-2.0 * sqrt_pi).epsilon(1e-13));
  CHECK(gamma_fn(-1.5) == doctest::Approx(4.0 * sqrt_pi / 3.0).epsilon(1e-13));
  CHECK(lgamma_abs(-0.5) == doctest::Approx(std::log(2.0 * sqrt_pi)).epsilon(1e-13));
}

TEST_CASE("digamma matches reference values") {
  CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-12));
  CHECK(digamma(10.0) == doctest::Approx(2.2517525890667211).epsilon(1e-12));
  // recurrence psi(x+1) = psi(x) + 1/x
  CHECK(digamma(3.7) == doctest::Approx(digamma(2.7) + 1.0 / 2.7).epsilon(1e-13));
}

TEST_CASE("modified Bessel K matches half-integer closed forms") {
  const double pi = std::numbers::pi;
  for (double x : {0.3, 0.7, 1.3, 4.0}) {
    const double k_half = std::sqrt(pi / (2.0 * x)) * std::exp(-x);
    CHECK(bessel_kv(0.5, x) == doctest::Approx(k_half).epsilon(1e-10));
    CHECK(bessel_kv(1.5, x) == doctest::Approx(k_half * (1.0 + 1.0 / x)).epsilon(1e-10));
  }
  CHECK(bessel_kv(0.0, 1.0) == doctest::Approx(0.42102443824070834).epsilon(1e-10));
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  const GaussLegendre gl = gauss_legendre(24);
  REQUIRE(gl.x.size() == 24);
  double w_sum = 0.0, x2 = 0.0, x40 = 0.0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    w_sum += gl.w[i];
    x2 += gl.w[i] * gl.x[i] * gl.x[i];
    x40 += gl.w[i] * std::pow(gl.x[i], 40);
  }
  CHECK(w_sum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(x40 == doctest::Approx(2.0 / 41.0).epsilon(1e-13));
  // symmetry of nodes
  CHECK(gl.x.front() == doctest::Approx(-gl.x.back()).epsilon(1e-15));
}

TEST_CASE("scan-then-Brent minimizer finds interior minima") {
  const auto quad = [](double x) { return (x - 1.234) * (x - 1.234); };
  const MinimizeResult r1 = minimize_scan_brent(quad, 0.0, 3.0, 0.1, 1e-10);
  CHECK(r1.x == doctest::Approx(1.234).epsilon(1e-8));

  const auto wave = [](double x) { return std::cos(3.0 * x); };
  const MinimizeResult r2 = minimize_scan_brent(wave, 0.0, 2.5, 0.05, 1e-10);
  CHECK(r2.x == doctest::Approx(std::numbers::pi / 3.0).epsilon(1e-7));
  CHECK(r2.fx == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("square-grid DFT satisfies Parseval and handles impulses") {
  Grid imp(8);
  imp.at(0, 0) = 1.0;
  for (const std::complex<double>& v : dft2(imp)) {
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.imag() == doctest::Approx(0.0).epsilon(1e-12));
  }

  Grid g(8);
  Rng rng(11);
  for (double& v : g.v) v = rng.next_normal();
  const auto spec = dft2(g);
  const auto power = dft2_power(g);
  double sum_sq = 0.0;
  for (double v : g.v) sum_sq += v * v;
  double sum_pow = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    sum_pow += power[i];
    CHECK(power[i] == doctest::Approx(std::norm(spec[i])).epsilon(1e-12));
  }
  CHECK(sum_pow == doctest::Approx(64.0 * sum_sq).epsilon(1e-12));
}

TEST_CASE("config parses key=value text with lists, comments, and overrides") {
  const Config cfg = Config::parse_text(
      "# design\n"
      "experiment = table1\n"
      "n = 30\n"
      "n = 40\n"
      "phi2 = 0.5, 0.8\n"
      "reps=400\n"
      "\n"
      "verbose = yes  # trailing comment\n");
  CHECK(cfg.get_string("experiment") == "table1");
  CHECK(cfg.get_long("n") == 40);  // scalar read: last value wins
  const std::vector<long> ns = cfg.get_long_list("n");
  REQUIRE(ns.size() == 2);
  CHECK(ns[0] == 30);
  CHECK(ns[1] == 40);
  const std::vector<double> ps = cfg.get_double_list("phi2");
  REQUIRE(ps.size() == 2);
  CHECK(ps[1] == 0.8);
  CHECK(cfg.get_bool("verbose", false));
  CHECK(cfg.get_long("missing", 7) == 7);
  CHECK_THROWS_AS((void)cfg.get_string("missing"), ConfigError);
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS((void)Config::parse_text("just a token\n"), ConfigError);
  const Config cfg = Config::parse_text("x = abc\n");
  CHECK_THROWS_AS((void)cfg.get_long("x"), ConfigError);
  CHECK_THROWS_AS((void)cfg.get_double("x"), ConfigError);
  CHECK_THROWS_AS((void)Config::parse_file("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("config round-trips through serialization losslessly") {
  Config cfg = Config::parse_text("a = 1\na = 2\nb = hello world\nc = 0.125\n");
  const Config back = Config::parse_text(cfg.serialize());
  for (const std::string& key : cfg.keys()) {
    CHECK(back.get_string_list(key) == cfg.get_string_list(key));
  }
  cfg.set("a", "9");  // set replaces the whole list, as a flag override must
  CHECK(Config::parse_text(cfg.serialize()).get_long_list("a") == std::vector<long>{9});
}

TEST_CASE("doubles are written in shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(1.0) == "1");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);
  const double tiny = 7.234561e-213;
  CHECK(std::stod(format_double(tiny)) == tiny);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_long(-12) == "-12");
}

TEST_CASE("tables serialize to csv and aligned text and read back") {
  Table t;
  t.columns = {"n", "value"};
  auto& r0 = t.add_row();
  r0[0] = "30";
  r0[1] = "2.5";
  auto& r1 = t.add_row();
  r1[0] = "40";
  r1[1] = "-0.125";

  CHECK(table_to_string(t, "csv") == "n,value\n30,2.5\n40,-0.125\n");
  const std::string txt = table_to_string(t, "txt");
  CHECK(txt.find("value") != std::string::npos);
  CHECK(txt.find("-0.125") != std::string::npos);
  CHECK_THROWS((void)table_to_string(t, "xml"));

  std::istringstream csv("n,value\r\n30,2.5\r\n40,-0.125\r\n");
  const Table back = read_csv(csv);
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[1][1] == "-0.125");
}
