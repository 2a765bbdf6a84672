#include "rfqv/robustkit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "rfqv/asymptotics.hpp"
#include "rfqv/lattice_spectrum.hpp"

namespace rfqv {

long SiteMask::count() const {
  long k = 0;
  for (char d : deleted) k += (d != 0);
  return k;
}

namespace {

SiteMask blank(int n) {
  if (n < 1) throw std::invalid_argument("robustkit: mask side must be positive");
  SiteMask m;
  m.n = n;
  m.deleted.assign(static_cast<std::size_t>(n) * n, 0);
  return m;
}

void mark(SiteMask& m, int t1, int t2) {
  if (t1 < 0 || t1 >= m.n || t2 < 0 || t2 >= m.n)
    throw std::invalid_argument("robustkit: deleted site outside the grid");
  m.deleted[static_cast<std::size_t>(t1) * m.n + t2] = 1;
}

}  // namespace

SiteMask SiteMask::empty(int n) { return blank(n); }

SiteMask SiteMask::single(int n, int t1, int t2) {
  SiteMask m = blank(n);
  mark(m, t1, t2);
  return m;
}

SiteMask SiteMask::row_segment(int n, int row, int col0, int col1) {
  SiteMask m = blank(n);
  for (int c = col0; c <= col1; ++c) mark(m, row, c);
  return m;
}

SiteMask SiteMask::diagonal_swath(int n, int width) {
  SiteMask m = blank(n);
  for (int t = 0; t < n; ++t)
    for (int w = 0; w < width; ++w)
      if (t + w < n) mark(m, t, t + w);
  return m;
}

SiteMask SiteMask::random_uniform(int n, long k, Rng& rng) {
  SiteMask m = blank(n);
  const long total = static_cast<long>(n) * n;
  if (k < 0 || k > total) throw std::invalid_argument("robustkit: bad deletion count");
  long placed = 0;
  while (placed < k) {
    const long idx = static_cast<long>(rng.next_uniform() * total);
    if (idx >= total) continue;
    if (!m.deleted[static_cast<std::size_t>(idx)]) {
      m.deleted[static_cast<std::size_t>(idx)] = 1;
      ++placed;
    }
  }
  return m;
}

SiteMask SiteMask::bernoulli(int n, double delete_prob, Rng& rng) {
  if (!(delete_prob >= 0.0) || !(delete_prob < 1.0))
    throw std::invalid_argument("robustkit: deletion probability must lie in [0, 1)");
  SiteMask m = blank(n);
  for (auto& d : m.deleted) d = (rng.next_uniform() < delete_prob) ? 1 : 0;
  return m;
}

PrunedQv prune_and_qv(const Grid& x, int m, TrimMode mode, const SiteMask& mask) {
  if (mask.n != x.n) throw std::invalid_argument("robustkit: mask side does not match the grid");
  const int n = x.n;
  const int min_side = (mode == TrimMode::per_step) ? 4 * m + 1 : 2 * m + 1;
  if (n < min_side)
    throw std::invalid_argument("robustkit: grid side too small for both variation steps");

  const Stencil st = Stencil::make(m, 1);
  const int d1_side = n - m;

  // Step-1 values with validity flags; arithmetic order matches apply_filter.
  std::vector<double> d1(static_cast<std::size_t>(d1_side) * d1_side, 0.0);
  std::vector<char> ok(static_cast<std::size_t>(d1_side) * d1_side, 0);
  for (int t1 = 0; t1 < d1_side; ++t1)
    for (int t2 = 0; t2 < d1_side; ++t2) {
      bool valid = true;
      for (int a1 = 0; a1 <= m && valid; ++a1)
        for (int a2 = 0; a2 <= m && valid; ++a2)
          if (mask.at(t1 + a1, t2 + a2)) valid = false;
      if (!valid) continue;
      double acc = 0.0;
      for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m; ++a2)
          acc += st.coeff(a1, a2) * x.at(t1 + a1, t2 + a2);
      d1[static_cast<std::size_t>(t1) * d1_side + t2] = acc;
      ok[static_cast<std::size_t>(t1) * d1_side + t2] = 1;
    }

  std::vector<int> binom(static_cast<std::size_t>(m) + 1, 1);
  for (int k = 1; k <= m; ++k) binom[k] = binom[k - 1] * (m - k + 1) / k;

  const int w1 = n - 2 * m;
  const int w2 = (mode == TrimMode::per_step) ? n - 4 * m : n - 2 * m;

  PrunedQv out;
  out.qv.m = m;
  out.qv.trim_mode = mode;
  double acc1 = 0.0;
  long kept1 = 0;
  for (int t1 = 0; t1 < w1; ++t1)
    for (int t2 = 0; t2 < w1; ++t2) {
      const std::size_t idx = static_cast<std::size_t>(t1) * d1_side + t2;
      if (!ok[idx]) continue;
      acc1 += d1[idx] * d1[idx];
      ++kept1;
    }

  double acc2 = 0.0;
  long kept2 = 0;
  for (int t1 = 0; t1 < w2; ++t1)
    for (int t2 = 0; t2 < w2; ++t2) {
      bool valid = true;
      for (int a1 = 0; a1 <= m && valid; ++a1)
        for (int a2 = 0; a2 <= m && valid; ++a2)
          if (!ok[static_cast<std::size_t>(t1 + a1) * d1_side + (t2 + a2)]) valid = false;
      if (!valid) continue;
      double acc = 0.0;
      for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m; ++a2)
          acc += binom[a1] * binom[a2] * d1[static_cast<std::size_t>(t1 + a1) * d1_side + (t2 + a2)];
      acc2 += acc * acc;
      ++kept2;
    }

  if (kept1 == 0 || kept2 == 0)
    throw std::invalid_argument("robustkit: deletion removed every window row");
  out.qv.q1 = acc1 / static_cast<double>(kept1);
  out.qv.q2 = acc2 / static_cast<double>(kept2);
  out.qv.m1 = kept1;
  out.qv.m2 = kept2;
  out.qv.degenerate = (out.qv.q1 == 0.0 || out.qv.q2 == 0.0);
  out.kept[0] = kept1;
  out.kept[1] = kept2;
  out.removed[0] = static_cast<long>(w1) * w1 - kept1;
  out.removed[1] = static_cast<long>(w2) * w2 - kept2;
  return out;
}

namespace {

struct RowSet {
  Eigen::SparseMatrix<double> full;    // all rows
  Eigen::SparseMatrix<double> kept;    // surviving rows, same column space
  std::vector<Eigen::Triplet<double>> removed_trips;
  long rows_total = 0, rows_kept = 0;
};

// Step-j filter rows over per-step anchors, split by the survival rule: the
// computational support of the row (offsets j*a for step 1, the box {0..2m}^2
// for step 2) must avoid deleted sites.
RowSet split_rows(int n, int m, int j, const SiteMask& mask) {
  const Stencil st = Stencil::make(m, j);
  const int side = n - 2 * j * m;
  if (side < 1) throw std::invalid_argument("robustkit: no anchors at this side and step");
  RowSet rs;
  rs.rows_total = static_cast<long>(side) * side;
  std::vector<Eigen::Triplet<double>> full_trips, kept_trips;
  long kept_row = 0;
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) {
      const long row = static_cast<long>(t1) * side + t2;
      bool valid = true;
      if (j == 1) {
        for (int a1 = 0; a1 <= m && valid; ++a1)
          for (int a2 = 0; a2 <= m && valid; ++a2)
            if (mask.at(t1 + a1, t2 + a2)) valid = false;
      } else {
        for (int a1 = 0; a1 <= 2 * m && valid; ++a1)
          for (int a2 = 0; a2 <= 2 * m && valid; ++a2)
            if (mask.at(t1 + a1, t2 + a2)) valid = false;
      }
      for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m; ++a2) {
          const long col = static_cast<long>(t1 + j * a1) * n + (t2 + j * a2);
          const double v = st.coeff(a1, a2);
          full_trips.emplace_back(row, col, v);
          if (valid) kept_trips.emplace_back(kept_row, col, v);
          else rs.removed_trips.emplace_back(row - kept_row, col, v);  // packed removed index
        }
      if (valid) ++kept_row;
    }
  rs.rows_kept = kept_row;
  const long cols = static_cast<long>(n) * n;
  rs.full.resize(rs.rows_total, cols);
  rs.full.setFromTriplets(full_trips.begin(), full_trips.end());
  rs.kept.resize(std::max(rs.rows_kept, 1L), cols);
  rs.kept.setFromTriplets(kept_trips.begin(), kept_trips.end());
  return rs;
}

double spectral_norm(const Eigen::SparseMatrix<double>& sym, Rng& rng) {
  Eigen::VectorXd v(sym.rows());
  for (long i = 0; i < v.size(); ++i) v[i] = rng.next_normal();
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXd w = sym * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double next = std::abs((w.transpose() * (sym * w))(0, 0));
    if (it > 20 && std::abs(next - lam) <= 1e-12 * std::max(1.0, lam)) return next;
    lam = next;
    v = w;
  }
  return lam;
}

}  // namespace

DeletionBounds measure_deletion_perturbation(int n, int m, const SiteMask& mask) {
  if (mask.n != n) throw std::invalid_argument("robustkit: mask side does not match");
  if (n > kFilterMatrixCap)
    throw std::invalid_argument("robustkit: deletion measurement is explicit-matrix scale only");
  DeletionBounds db;
  db.n = n;
  db.m = m;
  db.k = mask.count();
  if (db.k == 0) throw std::invalid_argument("robustkit: mask deletes nothing");

  Rng rng = Rng::from(derive_key(0x9e3779b97f4a7c15ull, 71), 0);
  for (int j = 1; j <= 2; ++j) {
    const RowSet rs = split_rows(n, m, j, mask);
    if (rs.rows_kept == 0)
      throw std::invalid_argument("robustkit: deletion removed every row at step " +
                                  std::to_string(j));
    const double mfull = static_cast<double>(rs.rows_total);
    const double mkept = static_cast<double>(rs.rows_kept);
    Eigen::SparseMatrix<double> a_full =
        Eigen::SparseMatrix<double>(rs.full.transpose()) * rs.full / mfull;
    Eigen::SparseMatrix<double> a_kept =
        Eigen::SparseMatrix<double>(rs.kept.transpose()) * rs.kept / mkept;
    Eigen::SparseMatrix<double> delta = a_kept - a_full;
    delta.prune(0.0);

    double f2 = 0.0;
    for (int outer = 0; outer < delta.outerSize(); ++outer)
      for (Eigen::SparseMatrix<double>::InnerIterator it(delta, outer); it; ++it)
        f2 += it.value() * it.value();
    db.normf[j - 1] = std::sqrt(f2);
    db.norm2[j - 1] = spectral_norm(delta, rng);
    db.removed_rows[j - 1] = rs.rows_total - rs.rows_kept;
    db.c_norm[j - 1] = db.normf[j - 1] * (static_cast<double>(n) * n) / static_cast<double>(db.k);

    // Rank of the removal part via the Gram matrix of the removed rows.
    const long d = rs.rows_total - rs.rows_kept;
    if (d > 0) {
      Eigen::SparseMatrix<double> rem(d, static_cast<long>(n) * n);
      rem.setFromTriplets(rs.removed_trips.begin(), rs.removed_trips.end());
      Eigen::MatrixXd gram = Eigen::MatrixXd(rem * rem.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
      const double top = es.eigenvalues().maxCoeff();
      long rank = 0;
      for (long i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > 1e-10 * std::max(top, 1.0)) ++rank;
      db.rank_removal[j - 1] = rank;
    }
  }
  return db;
}

std::vector<ThinningCell> thinning_experiment(const std::vector<int>& ns, double a, double phi2,
                                              int reps, std::uint64_t seed) {
  std::vector<ThinningCell> cells;
  for (int n : ns) {
    const AnchoredSampler sampler(n, {1.0, phi2}, 0);
    const std::uint64_t cell_seed = derive_key(seed, static_cast<std::uint64_t>(n));
    ThinningCell cell;
    cell.n = n;
    cell.exponent_a = a;
    cell.delete_prob = std::pow(static_cast<double>(n) * n, -a);
    cell.reps = reps;

    double sum_d = 0.0, sum_p = 0.0, sum_p2 = 0.0, sum_frac = 0.0, sum_dq = 0.0;
    long used = 0;
    for (int r = 0; r < reps; ++r) {
      Rng vr = Rng::from(derive_key(cell_seed, kStreamValues), static_cast<std::uint64_t>(r));
      Rng mr = Rng::from(derive_key(cell_seed, kStreamMask), static_cast<std::uint64_t>(r));
      const Grid x = sampler.draw(vr);
      const MomEstimate plain = mom_estimate(x, 1, TrimMode::common);
      const SiteMask mask = SiteMask::bernoulli(n, cell.delete_prob, mr);
      const PrunedQv pruned = prune_and_qv(x, 1, TrimMode::common, mask);
      if (plain.degenerate || pruned.qv.degenerate) {
        ++cell.out_of_domain;
        continue;
      }
      const double phi2_pruned = 0.5 * std::log2(pruned.qv.q2 / pruned.qv.q1);
      sum_d += std::abs(phi2_pruned - plain.phi2_hat);
      sum_p += plain.phi2_hat;
      sum_p2 += plain.phi2_hat * plain.phi2_hat;
      sum_frac += static_cast<double>(pruned.removed[0]) / static_cast<double>(plain.qv.m1);
      sum_dq += static_cast<double>(n) * std::abs(pruned.qv.q1 - plain.qv.q1);
      ++used;
    }
    if (used > 1) {
      cell.mean_abs_dphi2 = sum_d / used;
      const double mean = sum_p / used;
      cell.sd_phi2 = std::sqrt(std::max(0.0, sum_p2 / used - mean * mean));
      cell.mean_removed_frac = sum_frac / used;
      cell.mean_sqrtn_abs_dq1 = sum_dq / used;
    }
    cells.push_back(cell);
  }
  return cells;
}

namespace {

double window_mean_square(const Grid& g, int side) {
  double acc = 0.0;
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) acc += g.at(t1, t2) * g.at(t1, t2);
  return acc / (static_cast<double>(side) * side);
}

}  // namespace

std::vector<JitterCell> jitter_experiment(const std::vector<int>& ns, double c,
                                          const MaternParams& q, int m, int reps,
                                          std::uint64_t seed) {
  q.validate();
  std::vector<JitterCell> cells;
  for (int n : ns) {
    const auto clean_pts = unit_lattice_locations(n, static_cast<double>(n));
    const long dim = static_cast<long>(clean_pts.size());
    const Eigen::MatrixXd a_cov = locations_cov_matrix(clean_pts, q);
    Eigen::LLT<Eigen::MatrixXd> a_llt(a_cov);
    if (a_llt.info() != Eigen::Success)
      throw std::runtime_error("robustkit: clean jitter covariance failed to factor");

    const std::uint64_t cell_seed = derive_key(seed, static_cast<std::uint64_t>(n));
    JitterCell cell;
    cell.n = n;
    cell.c = c;
    cell.reps = reps;
    const int w1 = n - 2 * m;
    const double rescale = std::pow(static_cast<double>(n), 2.0 * q.nu);

    double sum_q1 = 0.0, sum_dq = 0.0, sum_site = 0.0;
    double sc = 0.0, sc2 = 0.0, sj = 0.0, sj2 = 0.0;
    long est_used = 0;
    for (int r = 0; r < reps; ++r) {
      Rng vr = Rng::from(derive_key(cell_seed, kStreamValues), static_cast<std::uint64_t>(r));
      Eigen::VectorXd z1(dim);
      for (long i = 0; i < dim; ++i) z1[i] = vr.next_normal();
      const Eigen::VectorXd x = a_llt.matrixL() * z1;

      Eigen::VectorXd y;
      if (c == 0.0) {
        y = x;
      } else {
        Rng jr = Rng::from(derive_key(cell_seed, kStreamJitter), static_cast<std::uint64_t>(r));
        const auto jit_pts = jitter_locations(clean_pts, c, n, jr);
        Eigen::MatrixXd b(dim, dim);
        for (long i = 0; i < dim; ++i)
          for (long jcol = 0; jcol < dim; ++jcol)
            b(i, jcol) = matern_cov(std::hypot(clean_pts[i][0] - jit_pts[jcol][0],
                                               clean_pts[i][1] - jit_pts[jcol][1]),
                                    q);
        const Eigen::MatrixXd c_cov = locations_cov_matrix(jit_pts, q);
        const Eigen::MatrixXd ainv_b = a_llt.solve(b);
        Eigen::MatrixXd schur = c_cov - b.transpose() * ainv_b;
        // Conditional draw: y | x is Gaussian around the regression of y on x.
        Eigen::LLT<Eigen::MatrixXd> s_llt(schur);
        if (s_llt.info() != Eigen::Success) {
          schur.diagonal().array() += 1e-12 * schur.trace() / static_cast<double>(dim);
          s_llt.compute(schur);
          if (s_llt.info() != Eigen::Success)
            throw std::runtime_error("robustkit: conditional jitter covariance failed to factor");
        }
        Eigen::VectorXd z2(dim);
        for (long i = 0; i < dim; ++i) z2[i] = vr.next_normal();
        y = ainv_b.transpose() * x + s_llt.matrixL() * z2;
      }

      const Grid gx = vector_to_grid(x, n);
      const Grid gy = vector_to_grid(y, n);
      const Grid dx = apply_filter(gx, m, 1);
      const Grid dy = apply_filter(gy, m, 1);
      const double q1x = window_mean_square(dx, w1);
      const double q1y = window_mean_square(dy, w1);
      sum_q1 += q1x;
      sum_dq += std::abs(q1y - q1x);
      double site = 0.0;
      for (int t1 = 0; t1 < w1; ++t1)
        for (int t2 = 0; t2 < w1; ++t2) {
          const double d = dy.at(t1, t2) - dx.at(t1, t2);
          site += d * d;
        }
      sum_site += site / (static_cast<double>(w1) * w1);
      const MomEstimate ec = mom_estimate(gx, m, TrimMode::common);
      const MomEstimate ej = mom_estimate(gy, m, TrimMode::common);
      if (!ec.degenerate && !ej.degenerate) {
        sc += ec.phi2_hat;
        sc2 += ec.phi2_hat * ec.phi2_hat;
        sj += ej.phi2_hat;
        sj2 += ej.phi2_hat * ej.phi2_hat;
        ++est_used;
      }
    }
    cell.mean_q1 = sum_q1 / reps;
    cell.mean_abs_dq1 = sum_dq / reps;
    cell.mean_abs_dq1_rescaled = rescale * cell.mean_abs_dq1;
    cell.per_site_msq_rescaled = rescale * sum_site / reps;
    if (est_used > 1) {
      const double mc = sc / est_used, mj = sj / est_used;
      cell.sd_phi2_clean = std::sqrt(std::max(0.0, sc2 / est_used - mc * mc));
      cell.sd_phi2_jittered = std::sqrt(std::max(0.0, sj2 / est_used - mj * mj));
    }
    cells.push_back(cell);
  }
  return cells;
}

MisspecCell misspec_experiment(int n, int m, const MaternParams& q, int reps, std::uint64_t seed) {
  q.validate();
  if (!(q.nu > 0.0) || !(q.nu < 1.0))
    throw std::invalid_argument("robustkit: misspecification study expects nu in (0, 1)");
  MisspecCell cell;
  cell.n = n;
  cell.m = m;
  cell.nu = q.nu;
  cell.reps = reps;

  const auto pts = unit_lattice_locations(n, static_cast<double>(n));
  const GaussianSampler sampler(locations_cov_matrix(pts, q));
  const std::uint64_t cell_seed = derive_key(seed, static_cast<std::uint64_t>(n));

  double s1 = 0.0, s2 = 0.0, sk = 0.0;
  long used = 0;
  for (int r = 0; r < reps; ++r) {
    Rng vr = Rng::from(derive_key(cell_seed, kStreamValues), static_cast<std::uint64_t>(r));
    const Grid x = vector_to_grid(sampler.draw(vr), n);
    const MomEstimate e = mom_estimate(x, m, TrimMode::common);
    if (e.degenerate) {
      ++cell.out_of_domain;
      continue;
    }
    if (e.out_of_domain) ++cell.out_of_domain;
    s1 += e.phi2_hat;
    s2 += e.phi2_hat * e.phi2_hat;
    if (e.phi1_hat) sk += std::pow(static_cast<double>(n), 2.0 * e.phi2_hat) * *e.phi1_hat;
    ++used;
  }
  if (used > 1) {
    cell.mean_phi2 = s1 / used;
    const double var = std::max(0.0, s2 / used - cell.mean_phi2 * cell.mean_phi2);
    cell.sd_phi2_scaled = std::sqrt(var) * (n - 2 * m);
    cell.mean_kappa = sk / used;
  }
  const CovPrediction cp = estimator_cov(n, m, ModelSpec::matern(q), TrimMode::common,
                                         PredictionKind::asymptotic);
  cell.th_sd_scaled = cp.sd_phi2_scaled();
  return cell;
}

bool spectral_domination(const MaternParams& q, int m, int grid_pts, int truncation,
                         double* worst_margin) {
  q.validate();
  if (!(q.nu > 0.0) || !(q.nu < 1.0))
    throw std::invalid_argument("robustkit: domination check expects nu in (0, 1)");
  if (grid_pts < 3) throw std::invalid_argument("robustkit: domination grid too small");
  const LatticeSpectrum f_mat(q, truncation);
  const PowerLawParams tangent = tangent_powerlaw(q).tangent;
  const LatticeSpectrum f_pl(tangent, truncation);

  const double pi = std::acos(-1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_pts; ++i)
    for (int j = 0; j < grid_pts; ++j) {
      const double l1 = -pi + 2.0 * pi * i / (grid_pts - 1);
      const double l2 = -pi + 2.0 * pi * j / (grid_pts - 1);
      if (l1 == 0.0 && l2 == 0.0) continue;
      const double gsq = symbol_g_sq(m, 1, l1, l2);
      const double fm = gsq * f_mat(l1, l2);
      const double fp = gsq * f_pl(l1, l2);
      if (fp == 0.0 && fm == 0.0) continue;
      worst = std::max(worst, (fm - fp) / fp);
    }
  if (worst_margin) *worst_margin = worst;
  return worst <= 1e-9;
}

double input_error_exponent(int n, int m, double phi2, const std::vector<double>& us, int reps,
                            std::uint64_t seed) {
  if (us.size() < 2) throw std::invalid_argument("robustkit: need at least two noise scales");
  const ModelSpec model = ModelSpec::power_law({1.0, phi2});
  const GaussianSampler sampler(filtered_cov_matrix(n, m, model));
  const int side = n - m;
  const std::uint64_t cell_seed = derive_key(seed, static_cast<std::uint64_t>(n));

  std::vector<double> mean_abs(us.size(), 0.0);
  for (int r = 0; r < reps; ++r) {
    Rng vr = Rng::from(derive_key(cell_seed, kStreamValues), static_cast<std::uint64_t>(r));
    const Grid d1 = vector_to_grid(sampler.draw(vr), side);
    const double base = quadratic_variations_filtered(d1, n, m, TrimMode::common).q1;
    for (std::size_t ui = 0; ui < us.size(); ++ui) {
      Rng nr = Rng::from(derive_key(cell_seed, kStreamNoise),
                         static_cast<std::uint64_t>(r) * us.size() + ui);
      Grid pert = d1;
      for (auto& v : pert.v) v += us[ui] * nr.next_normal();
      const double q1 = quadratic_variations_filtered(pert, n, m, TrimMode::common).q1;
      mean_abs[ui] += std::abs(q1 - base);
    }
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t ui = 0; ui < us.size(); ++ui) {
    const double lx = std::log(us[ui]);
    const double ly = std::log(mean_abs[ui] / reps);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double k = static_cast<double>(us.size());
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace rfqv
