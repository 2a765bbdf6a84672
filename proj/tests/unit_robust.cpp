#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rfqv/experiment.hpp"
#include "rfqv/filters.hpp"
#include "rfqv/gcmodel.hpp"
#include "rfqv/rng.hpp"
#include "rfqv/robustkit.hpp"

using namespace rfqv;

namespace {
Grid random_grid(int n, std::uint64_t key) {
  Grid g(n);
  Rng rng(key);
  for (double& v : g.v) v = rng.next_normal();
  return g;
}
}  // namespace

TEST_CASE("pruning with an empty mask reproduces the plain statistic") {
  const Grid x = random_grid(16, 12);
  const SiteMask none = SiteMask::empty(16);
  for (int m : {1, 2}) {
    for (TrimMode mode : {TrimMode::per_step, TrimMode::common}) {
      const QvStats plain = quadratic_variations(x, m, mode);
      const PrunedQv pruned = prune_and_qv(x, m, mode, none);
      CHECK(pruned.qv.q1 == plain.q1);
      CHECK(pruned.qv.q2 == plain.q2);
      CHECK(pruned.qv.m1 == plain.m1);
      CHECK(pruned.qv.m2 == plain.m2);
      CHECK(pruned.removed[0] == 0);
      CHECK(pruned.removed[1] == 0);
    }
  }
}

TEST_CASE("one interior deletion removes exactly the touching windows") {
  const Grid x = random_grid(16, 3);
  const SiteMask one = SiteMask::single(16, 7, 7);
  const PrunedQv p = prune_and_qv(x, 1, TrimMode::per_step, one);
  // step 1 reads a 2x2 box, step 2 a 3x3 box around each window origin
  CHECK(p.removed[0] == 4);
  CHECK(p.removed[1] == 9);
  CHECK(p.kept[0] == 14L * 14L - 4);
  CHECK(p.kept[1] == 12L * 12L - 9);
}

TEST_CASE("site masks report their intended geometry") {
  Rng rng(99);
  const SiteMask r = SiteMask::random_uniform(20, 17, rng);
  CHECK(r.count() == 17);

  const SiteMask seg = SiteMask::row_segment(12, 5, 2, 9);
  CHECK(seg.count() == 8);
  CHECK(seg.at(5, 2));
  CHECK(seg.at(5, 9));
  CHECK_FALSE(seg.at(5, 1));
  CHECK_FALSE(seg.at(4, 2));

  const SiteMask sw = SiteMask::diagonal_swath(10, 2);
  CHECK(sw.at(0, 0));
  CHECK(sw.at(5, 6));
  CHECK_FALSE(sw.at(0, 9));
  CHECK(sw.count() > 10);

  const SiteMask b = SiteMask::bernoulli(20, 0.0, rng);
  CHECK(b.count() == 0);
}

TEST_CASE("larger masks keep fewer windows") {
  const Grid x = random_grid(20, 8);
  Rng rng(5);
  const SiteMask small = SiteMask::random_uniform(20, 4, rng);
  SiteMask big = small;
  // grow the mask by four more deletions so the supports nest
  int added = 0;
  for (int t1 = 0; t1 < 20 && added < 4; ++t1)
    for (int t2 = 0; t2 < 20 && added < 4; ++t2)
      if (!big.at(t1, t2) && ((t1 * 7 + t2 * 13) % 11 == 0)) {
        big.deleted[static_cast<std::size_t>(t1) * 20 + t2] = 1;
        ++added;
      }
  REQUIRE(big.count() == 8);
  const PrunedQv ps = prune_and_qv(x, 1, TrimMode::common, small);
  const PrunedQv pb = prune_and_qv(x, 1, TrimMode::common, big);
  CHECK(pb.kept[0] <= ps.kept[0]);
  CHECK(pb.kept[1] <= ps.kept[1]);
}

TEST_CASE("deletion perturbation has low rank and ordered norms") {
  Rng rng(31);
  const SiteMask mask = SiteMask::random_uniform(20, 5, rng);
  const DeletionBounds b = measure_deletion_perturbation(20, 1, mask);
  for (int j = 0; j < 2; ++j) {
    CHECK(b.normf[j] >= b.norm2[j]);
    CHECK(b.norm2[j] > 0.0);
    CHECK(b.rank_removal[j] <= 4L * 5 * 4);  // 4 k (m+1)^2
    CHECK(b.removed_rows[j] > 0);
  }
  CHECK(b.k == 5);
}

TEST_CASE("perturbation norm grows between sqrt(k) and k in the deletion count") {
  // scattered deletions contribute nearly orthogonal low-rank pieces, so the
  // Frobenius norm adds in quadrature (sqrt k); the linear law is the upper
  // bound from the triangle inequality
  DeletionSpec spec;
  spec.ns = {24};
  spec.ks = {1, 4, 16};
  spec.add_quarter = false;
  spec.masks = 8;
  const std::vector<DeletionSummary> rows = run_deletion(spec);
  REQUIRE(rows.size() == 3);
  std::vector<double> ks, nf;
  for (const DeletionSummary& r : rows) {
    ks.push_back(static_cast<double>(r.k));
    nf.push_back(r.mean_normf[0]);
    CHECK(r.max_rank[0] <= r.rank_bound);
    CHECK(r.max_rank[1] <= r.rank_bound);
  }
  CHECK(nf[0] < nf[1]);
  CHECK(nf[1] < nf[2]);
  CHECK(nf[2] <= 16.0 * 1.3 * nf[0]);
  const double slope = loglog_slope(ks, nf);
  CHECK(slope > 0.4);
  CHECK(slope < 1.1);
}

TEST_CASE("thinning removes the scheduled fraction of sites") {
  const std::vector<ThinningCell> cells = thinning_experiment({16}, 0.75, 0.5, 8, 101);
  REQUIRE(cells.size() == 1);
  const ThinningCell& c = cells.front();
  CHECK(c.delete_prob == doctest::Approx(std::pow(256.0, -0.75)).epsilon(1e-12));
  // the reported fraction counts killed step-1 windows, roughly 4 per
  // scattered deleted site
  CHECK(c.mean_removed_frac > 2.0 * c.delete_prob);
  CHECK(c.mean_removed_frac < 8.0 * c.delete_prob);
  CHECK(c.mean_abs_dphi2 >= 0.0);
  CHECK(c.sd_phi2 > 0.0);
}

TEST_CASE("zero jitter amplitude reproduces the clean draws") {
  const MaternParams q{1.0, 1.0, 1.5};
  const std::vector<JitterCell> cells = jitter_experiment({12}, 0.0, q, 2, 4, 77);
  REQUIRE(cells.size() == 1);
  const JitterCell& c = cells.front();
  CHECK(c.mean_abs_dq1 == 0.0);  // coupled draws coincide bit for bit
  CHECK(c.sd_phi2_clean == c.sd_phi2_jittered);
  CHECK(c.mean_q1 > 0.0);
}

TEST_CASE("tangent spectrum dominates the matern spectrum after filtering") {
  double worst = 1.0;
  const bool ok = spectral_domination({1.0, 1.0, 0.5}, 2, 41, 30, &worst);
  CHECK(ok);
  CHECK(worst <= 0.0);
}

TEST_CASE("response to input noise is first order in the noise scale") {
  const std::vector<double> us = {1e-3, 1e-4, 1e-5};
  const double slope = input_error_exponent(16, 1, 0.5, us, 4, 909);
  CHECK(slope > 0.8);
  CHECK(slope < 1.2);
}
