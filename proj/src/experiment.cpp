#include "rfqv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "rfqv/gcmodel.hpp"
#include "rfqv/rng.hpp"

namespace rfqv {

std::uint64_t cell_seed(std::uint64_t master, int n, double param, EstimatorSet set) {
  std::uint64_t k = derive_key(master, static_cast<std::uint64_t>(n));
  k = derive_key(k, std::bit_cast<std::uint64_t>(param));
  return derive_key(k, static_cast<std::uint64_t>(set));
}

void parallel_for(int n_threads, long items, const std::function<void(long)>& fn) {
  if (items <= 0) return;
  long workers = std::max(1, n_threads);
  workers = std::min(workers, items);
  if (workers == 1) {
    for (long i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        long i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= items) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

SampleStats sample_stats(const std::vector<double>& v) {
  SampleStats s;
  s.count = static_cast<long>(v.size());
  if (s.count == 0) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count < 2) return s;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
  return s;
}

double sample_cov(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return 0.0;
  const SampleStats sa = sample_stats(a);
  const SampleStats sb = sample_stats(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - sa.mean) * (b[i] - sb.mean);
  return acc / static_cast<double>(a.size() - 1);
}

double sample_corr(const std::vector<double>& a, const std::vector<double>& b) {
  const SampleStats sa = sample_stats(a);
  const SampleStats sb = sample_stats(b);
  if (sa.sd <= 0.0 || sb.sd <= 0.0) return 0.0;
  return sample_cov(a, b) / (sa.sd * sb.sd);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_slope: need two equal-length samples");
  }
  const SampleStats sx = sample_stats(x);
  const SampleStats sy = sample_stats(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - sx.mean) * (y[i] - sy.mean);
    sxx += (x[i] - sx.mean) * (x[i] - sx.mean);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_slope: degenerate abscissa");
  return sxy / sxx;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) lx[i] = std::log(x[i]);
  for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
  return fit_slope(lx, ly);
}

namespace {

const char* kind_tag(PredictionKind k) {
  switch (k) {
    case PredictionKind::finite_window: return "finite-lattice";
    case PredictionKind::torus: return "torus";
    case PredictionKind::asymptotic: return "asymptotic";
  }
  return "unknown";
}

std::string bool_cell(bool b) { return b ? "1" : "0"; }

// Second-order expansion of E[Q2/Q1] around (q1, q2).
double taylor_ratio(const CovPrediction& cp) {
  const double var1 = cp.sigma_qq(0, 0) / cp.scale;
  const double cov12 = cp.sigma_qq(0, 1) / cp.scale;
  return (cp.q2 / cp.q1) * (1.0 + var1 / (cp.q1 * cp.q1) - cov12 / (cp.q1 * cp.q2));
}

}  // namespace

// --- table 1 ----------------------------------------------------------------

std::vector<Table1Cell> run_table1(const Table1Spec& spec) {
  std::vector<Table1Cell> out;
  for (int n : spec.ns) {
    for (double phi2 : spec.phi2s) {
      const ModelSpec model = ModelSpec::power_law({spec.phi1, phi2});
      const CovPrediction cp =
          estimator_cov(n, spec.m, model, TrimMode::common, PredictionKind::finite_window);
      const GaussianSampler sampler(filtered_cov_matrix(n, spec.m, model));
      const std::uint64_t key = cell_seed(spec.seed, n, phi2, EstimatorSet::mom_irf0);

      struct Slot {
        double log_phi1 = 0.0;
        double phi2_hat = 0.0;
        bool usable = false;
        bool ood = false;
      };
      std::vector<Slot> slots(static_cast<std::size_t>(spec.reps));
      parallel_for(spec.threads, spec.reps, [&](long r) {
        Rng rng = Rng::from(key, kStreamValues, static_cast<std::uint64_t>(r));
        const Grid d1 = vector_to_grid(sampler.draw(rng), n - spec.m);
        const MomEstimate est = mom_estimate_filtered(d1, n, spec.m, TrimMode::common);
        Slot& s = slots[static_cast<std::size_t>(r)];
        s.ood = est.out_of_domain;
        if (est.phi1_hat && !est.degenerate) {
          s.usable = true;
          s.log_phi1 = std::log(*est.phi1_hat);
          s.phi2_hat = est.phi2_hat;
        }
      });

      std::vector<double> lp, p2;
      long ood = 0;
      for (const Slot& s : slots) {
        if (s.ood) ++ood;
        if (s.usable) {
          lp.push_back(s.log_phi1);
          p2.push_back(s.phi2_hat);
        }
      }
      Table1Cell cell;
      cell.n = n;
      cell.m = spec.m;
      cell.phi1 = spec.phi1;
      cell.phi2 = phi2;
      cell.reps = spec.reps;
      cell.used = static_cast<long>(lp.size());
      cell.out_of_domain = ood;
      cell.ok = (spec.reps - cell.used) * 100 <= spec.reps;
      const double root_scale = std::sqrt(cp.scale);
      const SampleStats slp = sample_stats(lp);
      const SampleStats sp2 = sample_stats(p2);
      cell.mean_log_phi1 = slp.mean;
      cell.mean_phi2 = sp2.mean;
      cell.sd_log_phi1_scaled = root_scale * slp.sd;
      cell.sd_phi2_scaled = root_scale * sp2.sd;
      cell.corr = sample_corr(lp, p2);
      if (cell.used > 1) {
        const double root_used = std::sqrt(static_cast<double>(cell.used));
        const double root_sd = std::sqrt(2.0 * static_cast<double>(cell.used - 1));
        cell.se_mean_log_phi1 = slp.sd / root_used;
        cell.se_mean_phi2 = sp2.sd / root_used;
        cell.se_sd_log_phi1_scaled = cell.sd_log_phi1_scaled / root_sd;
        cell.se_sd_phi2_scaled = cell.sd_phi2_scaled / root_sd;
      }
      cell.th_sd_log_phi1 = std::sqrt(cp.omega_rel(0, 0));
      cell.th_sd_phi2 = std::sqrt(cp.omega_rel(1, 1));
      cell.th_corr = cp.omega_rel(0, 1) / (cell.th_sd_log_phi1 * cell.th_sd_phi2);
      cell.scale = cp.scale;
      out.push_back(cell);
    }
  }
  return out;
}

Table table1_table(const std::vector<Table1Cell>& cells) {
  Table t;
  t.columns = {"n", "m", "phi1", "phi2", "reps", "used", "out_of_domain", "ok",
               "mean_log_phi1", "mean_phi2", "sd_log_phi1_scaled", "sd_phi2_scaled", "corr",
               "se_mean_log_phi1", "se_mean_phi2", "se_sd_log_phi1_scaled", "se_sd_phi2_scaled",
               "th_kind", "th_sd_log_phi1", "th_sd_phi2", "th_corr", "scale"};
  for (const auto& c : cells) {
    auto& row = t.add_row();
    int i = 0;
    row[i++] = format_long(c.n);
    row[i++] = format_long(c.m);
    row[i++] = format_double(c.phi1);
    row[i++] = format_double(c.phi2);
    row[i++] = format_long(c.reps);
    row[i++] = format_long(c.used);
    row[i++] = format_long(c.out_of_domain);
    row[i++] = bool_cell(c.ok);
    row[i++] = format_double(c.mean_log_phi1);
    row[i++] = format_double(c.mean_phi2);
    row[i++] = format_double(c.sd_log_phi1_scaled);
    row[i++] = format_double(c.sd_phi2_scaled);
    row[i++] = format_double(c.corr);
    row[i++] = format_double(c.se_mean_log_phi1);
    row[i++] = format_double(c.se_mean_phi2);
    row[i++] = format_double(c.se_sd_log_phi1_scaled);
    row[i++] = format_double(c.se_sd_phi2_scaled);
    row[i++] = "finite-lattice";
    row[i++] = format_double(c.th_sd_log_phi1);
    row[i++] = format_double(c.th_sd_phi2);
    row[i++] = format_double(c.th_corr);
    row[i++] = format_double(c.scale);
  }
  return t;
}

// --- table 2 ----------------------------------------------------------------

std::vector<Table2Cell> run_table2(const Table2Spec& spec) {
  std::vector<Table2Cell> out;
  for (int n : spec.ns) {
    for (double phi2 : spec.phi2s) {
      const ModelSpec model = ModelSpec::power_law({spec.phi1, phi2});
      const CovPrediction cp =
          estimator_cov(n, spec.m, model, TrimMode::common, PredictionKind::torus);
      const GaussianSampler sampler(torus_filtered_cov_matrix(n, spec.m, model));
      const std::uint64_t key = cell_seed(spec.seed, n, phi2, EstimatorSet::mom_torus);

      struct Slot {
        double phi2_hat = 0.0;
        double ratio = 0.0;
        bool usable = false;
        bool ood = false;
      };
      std::vector<Slot> slots(static_cast<std::size_t>(spec.reps));
      parallel_for(spec.threads, spec.reps, [&](long r) {
        Rng rng = Rng::from(key, kStreamValues, static_cast<std::uint64_t>(r));
        const Grid y = vector_to_grid(sampler.draw(rng), n);
        const MomEstimate est = mom_estimate_torus(y, spec.m);
        Slot& s = slots[static_cast<std::size_t>(r)];
        s.ood = est.out_of_domain;
        if (!est.degenerate) {
          s.usable = true;
          s.phi2_hat = est.phi2_hat;
          s.ratio = est.qv.q2 / est.qv.q1;
        }
      });

      std::vector<double> p2, ratio;
      long ood = 0;
      for (const Slot& s : slots) {
        if (s.ood) ++ood;
        if (s.usable) {
          p2.push_back(s.phi2_hat);
          ratio.push_back(s.ratio);
        }
      }
      Table2Cell cell;
      cell.n = n;
      cell.m = spec.m;
      cell.phi1 = spec.phi1;
      cell.phi2 = phi2;
      cell.reps = spec.reps;
      cell.used = static_cast<long>(p2.size());
      cell.out_of_domain = ood;
      cell.ok = (spec.reps - cell.used + ood) * 100 <= spec.reps;
      const SampleStats sp2 = sample_stats(p2);
      const SampleStats sr = sample_stats(ratio);
      const double root_scale = std::sqrt(cp.scale);
      cell.mean_phi2 = sp2.mean;
      cell.sd_phi2_scaled = root_scale * sp2.sd;
      cell.mean_ratio = sr.mean;
      if (cell.used > 1) {
        const double root_used = std::sqrt(static_cast<double>(cell.used));
        cell.se_mean_phi2 = sp2.sd / root_used;
        cell.se_sd_phi2_scaled = cell.sd_phi2_scaled / std::sqrt(2.0 * (cell.used - 1.0));
        cell.se_mean_ratio = sr.sd / root_used;
      }
      cell.th_sd_phi2 = cp.sd_phi2_scaled();
      cell.th_ratio = taylor_ratio(cp);
      cell.th_ratio_exact_mean = cp.q2 / cp.q1;
      cell.scale = cp.scale;
      out.push_back(cell);
    }
  }
  return out;
}

Table table2_table(const std::vector<Table2Cell>& cells) {
  Table t;
  t.columns = {"n", "m", "phi1", "phi2", "reps", "used", "out_of_domain", "ok",
               "mean_phi2", "sd_phi2_scaled", "mean_ratio",
               "se_mean_phi2", "se_sd_phi2_scaled", "se_mean_ratio",
               "th_kind", "th_sd_phi2", "th_ratio", "th_ratio_exact_mean", "scale"};
  for (const auto& c : cells) {
    auto& row = t.add_row();
    int i = 0;
    row[i++] = format_long(c.n);
    row[i++] = format_long(c.m);
    row[i++] = format_double(c.phi1);
    row[i++] = format_double(c.phi2);
    row[i++] = format_long(c.reps);
    row[i++] = format_long(c.used);
    row[i++] = format_long(c.out_of_domain);
    row[i++] = bool_cell(c.ok);
    row[i++] = format_double(c.mean_phi2);
    row[i++] = format_double(c.sd_phi2_scaled);
    row[i++] = format_double(c.mean_ratio);
    row[i++] = format_double(c.se_mean_phi2);
    row[i++] = format_double(c.se_sd_phi2_scaled);
    row[i++] = format_double(c.se_mean_ratio);
    row[i++] = "torus";
    row[i++] = format_double(c.th_sd_phi2);
    row[i++] = format_double(c.th_ratio);
    row[i++] = format_double(c.th_ratio_exact_mean);
    row[i++] = format_double(c.scale);
  }
  return t;
}

// --- table 3 ----------------------------------------------------------------

namespace {

EstStats collect_est(const std::vector<double>& vals, long reps) {
  EstStats e;
  const SampleStats s = sample_stats(vals);
  e.used = s.count;
  e.errored = reps - s.count;
  e.mean = s.mean;
  e.sd = s.sd;
  return e;
}

bool interior_phi2(double v, double upper, double edge) {
  return v > edge + 1e-9 && v < upper - edge - 1e-9;
}

}  // namespace

std::vector<Table3Cell> run_table3(const Table3Spec& spec) {
  std::vector<Table3Cell> out;
  const WhittleOptions wopt{};
  const RemlOptions ropt{};
  for (int n : spec.ns) {
    const WhittleSpectrumTable wt(n, wopt);
    const RemlGridEstimator rg(n, ropt);

    struct Slot {
      double bil = 0.0, lap = 0.0, whi = 0.0;
      bool bil_ok = false, lap_ok = false, whi_ok = false;
      Grid d1;
    };
    std::vector<std::vector<Slot>> cell_slots(spec.phi2s.size());

    for (std::size_t ci = 0; ci < spec.phi2s.size(); ++ci) {
      const double phi2 = spec.phi2s[ci];
      const AnchoredSampler sampler(n, {spec.phi1, phi2}, 0);
      const std::uint64_t key = cell_seed(spec.seed, n, phi2, EstimatorSet::four_way);
      auto& slots = cell_slots[ci];
      slots.resize(static_cast<std::size_t>(spec.reps));
      parallel_for(spec.threads, spec.reps, [&](long r) {
        Rng rng = Rng::from(key, kStreamValues, static_cast<std::uint64_t>(r));
        const Grid x = sampler.draw(rng);
        Slot& s = slots[static_cast<std::size_t>(r)];
        const MomEstimate bil = mom_estimate(x, 1, TrimMode::common);
        s.bil = bil.phi2_hat;
        s.bil_ok = !bil.out_of_domain && !bil.degenerate;
        const MomEstimate lap = laplacian_estimate(x);
        s.lap = lap.phi2_hat;
        s.lap_ok = !lap.out_of_domain && !lap.degenerate;
        const WhittleFit whi = wt.fit(x);
        s.whi = whi.phi2_hat;
        s.whi_ok = interior_phi2(whi.phi2_hat, wopt.m, wopt.edge);
        s.d1 = apply_filter(x, 1, 1);
      });
    }

    // One likelihood-grid pass over every cell's filtered fields: the
    // factorizations depend only on (n, grid point), not on the cell.
    std::vector<Grid> all_d1;
    all_d1.reserve(cell_slots.size() * static_cast<std::size_t>(spec.reps));
    for (auto& slots : cell_slots) {
      for (auto& s : slots) all_d1.push_back(std::move(s.d1));
    }
    const std::vector<RemlFit> fits = rg.fit_all(all_d1);

    for (std::size_t ci = 0; ci < spec.phi2s.size(); ++ci) {
      const double phi2 = spec.phi2s[ci];
      const auto& slots = cell_slots[ci];
      std::vector<double> bil, lap, whi, rem;
      for (std::size_t r = 0; r < slots.size(); ++r) {
        if (slots[r].bil_ok) bil.push_back(slots[r].bil);
        if (slots[r].lap_ok) lap.push_back(slots[r].lap);
        if (slots[r].whi_ok) whi.push_back(slots[r].whi);
        const RemlFit& f = fits[ci * static_cast<std::size_t>(spec.reps) + r];
        if (interior_phi2(f.phi2_hat, ropt.m, ropt.edge)) rem.push_back(f.phi2_hat);
      }
      Table3Cell cell;
      cell.n = n;
      cell.phi1 = spec.phi1;
      cell.phi2 = phi2;
      cell.reps = spec.reps;
      cell.bilinear = collect_est(bil, spec.reps);
      cell.laplacian = collect_est(lap, spec.reps);
      cell.whittle = collect_est(whi, spec.reps);
      cell.reml = collect_est(rem, spec.reps);
      cell.reml_fisher_sd = rg.fisher_sd(phi2);
      const long worst = std::max(std::max(cell.bilinear.errored, cell.laplacian.errored),
                                  std::max(cell.whittle.errored, cell.reml.errored));
      cell.ok = worst * 100 <= spec.reps;
      out.push_back(cell);
    }
  }
  return out;
}

Table table3_table(const std::vector<Table3Cell>& cells) {
  Table t;
  t.columns = {"n", "phi1", "phi2", "reps", "ok",
               "bilinear_mean", "bilinear_sd", "bilinear_errored",
               "laplacian_mean", "laplacian_sd", "laplacian_errored",
               "whittle_mean", "whittle_sd", "whittle_errored",
               "reml_mean", "reml_sd", "reml_errored", "reml_fisher_sd"};
  for (const auto& c : cells) {
    auto& row = t.add_row();
    int i = 0;
    row[i++] = format_long(c.n);
    row[i++] = format_double(c.phi1);
    row[i++] = format_double(c.phi2);
    row[i++] = format_long(c.reps);
    row[i++] = bool_cell(c.ok);
    for (const EstStats* e : {&c.bilinear, &c.laplacian, &c.whittle, &c.reml}) {
      row[i++] = format_double(e->mean);
      row[i++] = format_double(e->sd);
      row[i++] = format_long(e->errored);
    }
    row[i++] = format_double(c.reml_fisher_sd);
  }
  return t;
}

// --- figure 1 ---------------------------------------------------------------

Fig1Result run_fig1(const Fig1Spec& spec) {
  Fig1Result res;
  res.spec = spec;
  const PowerLawParams p{spec.phi1, spec.phi2};
  const AnchoredSampler sampler(spec.n, p, 0);
  const std::uint64_t key = cell_seed(spec.seed, spec.n, spec.phi2, EstimatorSet::variogram);
  const double log2_n = std::log2(static_cast<double>(spec.n));

  struct Slot {
    std::vector<double> gamma_hat;
    double slope = 0.0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(spec.reps));
  parallel_for(spec.threads, spec.reps, [&](long r) {
    Rng rng = Rng::from(key, kStreamValues, static_cast<std::uint64_t>(r));
    const Grid x = sampler.draw(rng);
    Slot& s = slots[static_cast<std::size_t>(r)];
    std::vector<double> xs, ys;
    for (int h : spec.hs) {
      const double gh = empirical_variogram(x, h);
      s.gamma_hat.push_back(gh);
      xs.push_back(std::log2(static_cast<double>(h)));
      ys.push_back(0.5 * std::log2(gh / semivariogram_powerlaw(h, p)));
    }
    s.slope = fit_slope(xs, ys);
  });

  for (int r = 0; r < spec.reps; ++r) {
    const Slot& s = slots[static_cast<std::size_t>(r)];
    for (std::size_t hi = 0; hi < spec.hs.size(); ++hi) {
      Fig1Point pt;
      pt.rep = r;
      pt.h = spec.hs[hi];
      pt.log2_h = std::log2(static_cast<double>(pt.h));
      pt.log2_h_fd = pt.log2_h - log2_n;
      pt.gamma_hat = s.gamma_hat[hi];
      pt.gamma_true = semivariogram_powerlaw(pt.h, p);
      pt.half_log2_ratio = 0.5 * std::log2(pt.gamma_hat / pt.gamma_true);
      res.points.push_back(pt);
    }
    res.slopes.push_back(s.slope);
  }
  const SampleStats ss = sample_stats(res.slopes);
  res.mean_slope = ss.mean;
  res.se_slope = ss.count > 0 ? ss.sd / std::sqrt(static_cast<double>(ss.count)) : 0.0;
  return res;
}

Table fig1_table(const Fig1Result& r) {
  Table t;
  t.columns = {"rep", "h", "log2_h", "log2_h_fd", "gamma_hat", "gamma_true", "half_log2_ratio"};
  for (const auto& p : r.points) {
    auto& row = t.add_row();
    int i = 0;
    row[i++] = format_long(p.rep);
    row[i++] = format_long(p.h);
    row[i++] = format_double(p.log2_h);
    row[i++] = format_double(p.log2_h_fd);
    row[i++] = format_double(p.gamma_hat);
    row[i++] = format_double(p.gamma_true);
    row[i++] = format_double(p.half_log2_ratio);
  }
  return t;
}

Table fig1_summary_table(const Fig1Result& r) {
  Table t;
  t.columns = {"key", "value"};
  auto put = [&](const std::string& k, const std::string& v) {
    auto& row = t.add_row();
    row[0] = k;
    row[1] = v;
  };
  put("n", format_long(r.spec.n));
  put("phi1", format_double(r.spec.phi1));
  put("phi2", format_double(r.spec.phi2));
  put("reps", format_long(r.spec.reps));
  put("mean_slope", format_double(r.mean_slope));
  put("se_slope", format_double(r.se_slope));
  for (std::size_t i = 0; i < r.slopes.size(); ++i) {
    put("slope_rep_" + format_long(static_cast<long>(i)), format_double(r.slopes[i]));
  }
  return t;
}

// --- figure 2 ---------------------------------------------------------------

Fig2Result run_fig2(const Fig2Spec& spec) {
  Fig2Result res;
  res.spec = spec;
  const ModelSpec model = ModelSpec::power_law({spec.phi1, spec.phi2});
  const CovPrediction cp =
      estimator_cov(spec.n, spec.m, model, TrimMode::common, PredictionKind::finite_window);
  const FdPrediction fdp = fd_prediction(cp);
  const GaussianSampler sampler(filtered_cov_matrix(spec.n, spec.m, model));
  const std::uint64_t key = cell_seed(spec.seed, spec.n, spec.phi2, EstimatorSet::mom_irf0);

  struct Slot {
    Fig2Point pt;
    bool usable = false;
    bool ood = false;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(spec.reps));
  parallel_for(spec.threads, spec.reps, [&](long r) {
    Rng rng = Rng::from(key, kStreamValues, static_cast<std::uint64_t>(r));
    const Grid d1 = vector_to_grid(sampler.draw(rng), spec.n - spec.m);
    const MomEstimate est = mom_estimate_filtered(d1, spec.n, spec.m, TrimMode::common);
    Slot& s = slots[static_cast<std::size_t>(r)];
    s.ood = est.out_of_domain;
    const FdView fd = fd_view(est, spec.phi1, spec.phi2);
    if (est.phi1_hat && fd.log_rescaled && !est.degenerate) {
      s.usable = true;
      s.pt.rep = static_cast<int>(r);
      s.pt.log_phi1 = std::log(*est.phi1_hat);
      s.pt.phi2_hat = est.phi2_hat;
      s.pt.log_fd_unstab = *fd.log_rescaled;
    }
  });

  std::vector<double> lp, p2, lfd;
  for (const Slot& s : slots) {
    if (s.ood) ++res.out_of_domain;
    if (s.usable) {
      res.points.push_back(s.pt);
      lp.push_back(s.pt.log_phi1);
      p2.push_back(s.pt.phi2_hat);
      lfd.push_back(s.pt.log_fd_unstab);
    }
  }
  res.used = static_cast<long>(res.points.size());
  res.ok = (spec.reps - res.used) * 100 <= spec.reps;
  res.corr_fd = sample_corr(lfd, p2);
  res.corr_id = sample_corr(lp, p2);
  res.scale = cp.scale;
  res.sd_phi2_scaled = std::sqrt(cp.scale) * sample_stats(p2).sd;
  const double v11 = sample_stats(lp).sd;
  const double v22 = sample_stats(p2).sd;
  res.stab_cov[0] = cp.scale * v11 * v11;
  res.stab_cov[1] = cp.scale * sample_cov(lp, p2);
  res.stab_cov[2] = cp.scale * v22 * v22;
  res.th_stab_cov[0] = fdp.stabilized(0, 0);
  res.th_stab_cov[1] = fdp.stabilized(0, 1);
  res.th_stab_cov[2] = fdp.stabilized(1, 1);
  res.th_corr_fd = fdp.corr_unstabilized;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    worst = std::max(worst, std::abs(res.stab_cov[i] - res.th_stab_cov[i]) /
                                std::abs(res.th_stab_cov[i]));
  }
  res.max_stab_rel_err = worst;
  return res;
}

Table fig2_table(const Fig2Result& r) {
  Table t;
  t.columns = {"rep", "log_phi1", "phi2_hat", "log_fd_unstab"};
  for (const auto& p : r.points) {
    auto& row = t.add_row();
    row[0] = format_long(p.rep);
    row[1] = format_double(p.log_phi1);
    row[2] = format_double(p.phi2_hat);
    row[3] = format_double(p.log_fd_unstab);
  }
  return t;
}

Table fig2_summary_table(const Fig2Result& r) {
  Table t;
  t.columns = {"key", "value"};
  auto put = [&](const std::string& k, const std::string& v) {
    auto& row = t.add_row();
    row[0] = k;
    row[1] = v;
  };
  put("n", format_long(r.spec.n));
  put("m", format_long(r.spec.m));
  put("phi1", format_double(r.spec.phi1));
  put("phi2", format_double(r.spec.phi2));
  put("reps", format_long(r.spec.reps));
  put("used", format_long(r.used));
  put("out_of_domain", format_long(r.out_of_domain));
  put("ok", bool_cell(r.ok));
  put("corr_fd", format_double(r.corr_fd));
  put("th_corr_fd", format_double(r.th_corr_fd));
  put("corr_id", format_double(r.corr_id));
  put("sd_phi2_scaled", format_double(r.sd_phi2_scaled));
  put("th_kind", "finite-lattice");
  put("stab_cov_11", format_double(r.stab_cov[0]));
  put("stab_cov_12", format_double(r.stab_cov[1]));
  put("stab_cov_22", format_double(r.stab_cov[2]));
  put("th_stab_cov_11", format_double(r.th_stab_cov[0]));
  put("th_stab_cov_12", format_double(r.th_stab_cov[1]));
  put("th_stab_cov_22", format_double(r.th_stab_cov[2]));
  put("max_stab_rel_err", format_double(r.max_stab_rel_err));
  put("scale", format_double(r.scale));
  return t;
}

// --- robustness drivers -------------------------------------------------------

std::vector<DeletionSummary> run_deletion(const DeletionSpec& spec) {
  std::vector<DeletionSummary> out;
  for (int n : spec.ns) {
    std::vector<long> ks = spec.ks;
    if (spec.add_quarter) {
      const long q = n / 4;
      if (std::find(ks.begin(), ks.end(), q) == ks.end()) ks.push_back(q);
    }
    for (long k : ks) {
      const std::uint64_t key =
          cell_seed(spec.seed, n, static_cast<double>(k), EstimatorSet::deletion);
      DeletionSummary s;
      s.n = n;
      s.m = spec.m;
      s.k = k;
      s.masks = spec.masks;
      s.rank_bound = 4 * k * (spec.m + 1) * (spec.m + 1);
      for (int i = 0; i < spec.masks; ++i) {
        Rng rng = Rng::from(key, kStreamMask, static_cast<std::uint64_t>(i));
        const SiteMask mask = SiteMask::random_uniform(n, k, rng);
        const DeletionBounds b = measure_deletion_perturbation(n, spec.m, mask);
        for (int j = 0; j < 2; ++j) {
          s.mean_normf[j] += b.normf[j] / spec.masks;
          s.mean_norm2[j] += b.norm2[j] / spec.masks;
          s.mean_c[j] += b.c_norm[j] / spec.masks;
          s.max_rank[j] = std::max(s.max_rank[j], b.rank_removal[j]);
        }
      }
      out.push_back(s);
    }
  }
  return out;
}

Table deletion_table(const std::vector<DeletionSummary>& rows) {
  Table t;
  t.columns = {"n", "m", "k", "masks",
               "mean_normf_1", "mean_normf_2", "mean_norm2_1", "mean_norm2_2",
               "c_1", "c_2", "max_rank_1", "max_rank_2", "rank_bound"};
  for (const auto& s : rows) {
    auto& row = t.add_row();
    int i = 0;
    row[i++] = format_long(s.n);
    row[i++] = format_long(s.m);
    row[i++] = format_long(s.k);
    row[i++] = format_long(s.masks);
    row[i++] = format_double(s.mean_normf[0]);
    row[i++] = format_double(s.mean_normf[1]);
    row[i++] = format_double(s.mean_norm2[0]);
    row[i++] = format_double(s.mean_norm2[1]);
    row[i++] = format_double(s.mean_c[0]);
    row[i++] = format_double(s.mean_c[1]);
    row[i++] = format_long(s.max_rank[0]);
    row[i++] = format_long(s.max_rank[1]);
    row[i++] = format_long(s.rank_bound);
  }
  return t;
}

ThinningResult run_thinning(const ThinningSpec& spec) {
  ThinningResult r;
  r.spec = spec;
  const std::uint64_t base =
      derive_key(spec.seed, static_cast<std::uint64_t>(EstimatorSet::thinning));
  r.main = thinning_experiment(spec.ns, spec.a, spec.phi2, spec.reps,
                               derive_key(base, std::bit_cast<std::uint64_t>(spec.a)));
  r.control = thinning_experiment(spec.ns, spec.a_control, spec.phi2, spec.reps,
                                  derive_key(base, std::bit_cast<std::uint64_t>(spec.a_control)));
  return r;
}

Table thinning_table(const ThinningResult& r) {
  Table t;
  t.columns = {"schedule", "a", "n", "delete_prob", "reps",
               "mean_abs_dphi2", "sd_phi2", "mean_sqrtn_abs_dq1",
               "mean_removed_frac", "out_of_domain"};
  auto emit = [&](const char* tag, double a, const std::vector<ThinningCell>& cells) {
    for (const auto& c : cells) {
      auto& row = t.add_row();
      int i = 0;
      row[i++] = tag;
      row[i++] = format_double(a);
      row[i++] = format_long(c.n);
      row[i++] = format_double(c.delete_prob);
      row[i++] = format_long(c.reps);
      row[i++] = format_double(c.mean_abs_dphi2);
      row[i++] = format_double(c.sd_phi2);
      row[i++] = format_double(c.mean_sqrtn_abs_dq1);
      row[i++] = format_double(c.mean_removed_frac);
      row[i++] = format_long(c.out_of_domain);
    }
  };
  emit("main", r.spec.a, r.main);
  emit("control", r.spec.a_control, r.control);
  return t;
}

JitterResult run_jitter(const JitterSpec& spec) {
  JitterResult r;
  r.spec = spec;
  const MaternParams q{spec.sigma2, spec.rho, spec.nu};
  const std::uint64_t seed =
      derive_key(spec.seed, static_cast<std::uint64_t>(EstimatorSet::jitter));
  r.cells = jitter_experiment(spec.ns, spec.c, q, spec.m, spec.reps, seed);
  if (r.cells.size() >= 2) {
    r.rescaled_dq1_ratio =
        r.cells.back().mean_abs_dq1_rescaled / r.cells.front().mean_abs_dq1_rescaled;
  }
  return r;
}

Table jitter_table(const JitterResult& r) {
  Table t;
  t.columns = {"n", "c", "reps", "mean_q1", "mean_abs_dq1", "mean_abs_dq1_rescaled",
               "per_site_msq_rescaled", "sd_phi2_clean", "sd_phi2_jittered",
               "rescaled_ratio_to_prev"};
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    auto& row = t.add_row();
    int j = 0;
    row[j++] = format_long(c.n);
    row[j++] = format_double(c.c);
    row[j++] = format_long(c.reps);
    row[j++] = format_double(c.mean_q1);
    row[j++] = format_double(c.mean_abs_dq1);
    row[j++] = format_double(c.mean_abs_dq1_rescaled);
    row[j++] = format_double(c.per_site_msq_rescaled);
    row[j++] = format_double(c.sd_phi2_clean);
    row[j++] = format_double(c.sd_phi2_jittered);
    row[j++] = i == 0 ? std::string("")
                      : format_double(r.cells[i].mean_abs_dq1_rescaled /
                                      r.cells[i - 1].mean_abs_dq1_rescaled);
  }
  return t;
}

MisspecResult run_misspec(const MisspecSpec& spec) {
  MisspecResult r;
  r.spec = spec;
  const MaternParams q{spec.sigma2, spec.rho, spec.nu};
  const std::uint64_t seed =
      derive_key(spec.seed, static_cast<std::uint64_t>(EstimatorSet::misspec));
  r.cell = misspec_experiment(spec.n, spec.m, q, spec.reps, seed);
  r.domination_pass = spectral_domination(q, spec.m, spec.domination_grid, 30,
                                          &r.domination_worst);
  r.c_mat = tangent_powerlaw(q).c_mat;
  return r;
}

Table misspec_table(const MisspecResult& r) {
  Table t;
  t.columns = {"key", "value"};
  auto put = [&](const std::string& k, const std::string& v) {
    auto& row = t.add_row();
    row[0] = k;
    row[1] = v;
  };
  put("n", format_long(r.cell.n));
  put("m", format_long(r.cell.m));
  put("nu", format_double(r.cell.nu));
  put("reps", format_long(r.cell.reps));
  put("mean_phi2", format_double(r.cell.mean_phi2));
  put("bias_phi2", format_double(r.cell.mean_phi2 - r.cell.nu));
  put("sd_phi2_scaled", format_double(r.cell.sd_phi2_scaled));
  put("th_kind", "asymptotic");
  put("th_sd_scaled", format_double(r.cell.th_sd_scaled));
  put("mean_kappa", format_double(r.cell.mean_kappa));
  put("c_mat", format_double(r.c_mat));
  put("domination_pass", bool_cell(r.domination_pass));
  put("domination_worst", format_double(r.domination_worst));
  put("out_of_domain", format_long(r.cell.out_of_domain));
  return t;
}

std::vector<TrimmingRow> run_trimming(const std::vector<int>& ns, int m,
                                      const std::vector<double>& phi2s) {
  std::vector<TrimmingRow> out;
  for (double phi2 : phi2s) {
    const ModelSpec model = ModelSpec::power_law({1.0, phi2});
    for (int n : ns) {
      TrimmingRow row;
      row.n = n;
      row.m = m;
      row.phi2 = phi2;
      row.var_raw = trimming_gap_variance(n, m, model);
      const double trim_count = static_cast<double>(n - 4 * m) * (n - 4 * m);
      row.var_scaled_trim_count = trim_count * row.var_raw;
      row.var_scaled_sites = static_cast<double>(n) * n * row.var_raw;
      out.push_back(row);
    }
  }
  return out;
}

Table trimming_table(const std::vector<TrimmingRow>& rows) {
  Table t;
  t.columns = {"n", "m", "phi2", "var_raw", "var_scaled_trim_count", "var_scaled_sites"};
  for (const auto& r : rows) {
    auto& row = t.add_row();
    int i = 0;
    row[i++] = format_long(r.n);
    row[i++] = format_long(r.m);
    row[i++] = format_double(r.phi2);
    row[i++] = format_double(r.var_raw);
    row[i++] = format_double(r.var_scaled_trim_count);
    row[i++] = format_double(r.var_scaled_sites);
  }
  return t;
}

Table theory_table(const std::vector<int>& ns, const std::vector<double>& phi2s, double phi1,
                   int m, TrimMode mode, PredictionKind kind) {
  Table t;
  t.columns = {"n", "m", "phi1", "phi2", "kind", "q1", "q2", "scale",
               "sigma_qq_11", "sigma_qq_12", "sigma_qq_22",
               "omega_11", "omega_12", "omega_22",
               "sd_log_phi1_scaled", "sd_phi2_scaled", "corr"};
  for (int n : ns) {
    for (double phi2 : phi2s) {
      const ModelSpec model = ModelSpec::power_law({phi1, phi2});
      const CovPrediction cp = estimator_cov(n, m, model, mode, kind);
      auto& row = t.add_row();
      int i = 0;
      row[i++] = format_long(n);
      row[i++] = format_long(m);
      row[i++] = format_double(phi1);
      row[i++] = format_double(phi2);
      row[i++] = kind_tag(kind);
      row[i++] = format_double(cp.q1);
      row[i++] = format_double(cp.q2);
      row[i++] = format_double(cp.scale);
      row[i++] = format_double(cp.sigma_qq(0, 0));
      row[i++] = format_double(cp.sigma_qq(0, 1));
      row[i++] = format_double(cp.sigma_qq(1, 1));
      row[i++] = format_double(cp.omega(0, 0));
      row[i++] = format_double(cp.omega(0, 1));
      row[i++] = format_double(cp.omega(1, 1));
      row[i++] = format_double(std::sqrt(cp.omega_rel(0, 0)));
      row[i++] = format_double(std::sqrt(cp.omega_rel(1, 1)));
      row[i++] = format_double(cp.corr());
      (void)i;
    }
  }
  return t;
}

// --- config-driven dispatch ----------------------------------------------------

namespace {

std::vector<int> int_list(const Config& cfg, const std::string& key, std::vector<int> fallback) {
  if (!cfg.has(key)) return fallback;
  std::vector<int> out;
  for (long v : cfg.get_long_list(key)) out.push_back(static_cast<int>(v));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<double> double_list(const Config& cfg, const std::string& key,
                                std::vector<double> fallback) {
  if (!cfg.has(key)) return fallback;
  std::vector<double> out = cfg.get_double_list(key);
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::uint64_t seed_of(const Config& cfg) {
  return static_cast<std::uint64_t>(cfg.get_long("seed", static_cast<long>(kDefaultSeed)));
}

int reps_of(const Config& cfg, int fallback) {
  const long r = cfg.get_long("reps", fallback);
  if (r < 1) throw ConfigError("reps must be >= 1");
  return static_cast<int>(r);
}

std::string out_path(const std::string& dir, const std::string& stem, const std::string& format) {
  return dir + "/" + stem + "." + format;
}

}  // namespace

std::vector<std::string> run_experiment_files(const Config& cfg, const std::string& out_dir,
                                              const std::string& format, std::ostream& progress) {
  if (format != "csv" && format != "txt") {
    throw ConfigError("format must be csv or txt, got '" + format + "'");
  }
  const std::string name = cfg.get_string("experiment");
  const int threads = static_cast<int>(cfg.get_long("threads", 1));
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& stem, const Table& t) {
    const std::string path = out_path(out_dir, stem, format);
    write_table(path, t, format);
    files.push_back(path);
    progress << "wrote " << path << "\n";
  };

  if (name == "table1" || name == "custom") {
    Table1Spec s;
    if (name == "custom") {
      s.ns = {static_cast<int>(cfg.get_long("n"))};
      s.phi2s = {cfg.get_double("phi2")};
      s.reps = reps_of(cfg, 100);
    } else {
      s.ns = int_list(cfg, "ns", s.ns);
      s.phi2s = double_list(cfg, "phi2s", s.phi2s);
      s.reps = reps_of(cfg, s.reps);
    }
    s.phi1 = cfg.get_double("phi1", s.phi1);
    s.m = static_cast<int>(cfg.get_long("m", s.m));
    s.seed = seed_of(cfg);
    s.threads = threads;
    emit(name, table1_table(run_table1(s)));
  } else if (name == "table2") {
    Table2Spec s;
    s.ns = int_list(cfg, "ns", s.ns);
    s.phi2s = double_list(cfg, "phi2s", s.phi2s);
    s.phi1 = cfg.get_double("phi1", s.phi1);
    s.m = static_cast<int>(cfg.get_long("m", s.m));
    s.reps = reps_of(cfg, s.reps);
    s.seed = seed_of(cfg);
    s.threads = threads;
    emit(name, table2_table(run_table2(s)));
  } else if (name == "table3") {
    Table3Spec s;
    s.ns = int_list(cfg, "ns", s.ns);
    s.phi2s = double_list(cfg, "phi2s", s.phi2s);
    s.phi1 = cfg.get_double("phi1", s.phi1);
    s.reps = reps_of(cfg, s.reps);
    s.seed = seed_of(cfg);
    s.threads = threads;
    emit(name, table3_table(run_table3(s)));
  } else if (name == "fig1") {
    Fig1Spec s;
    s.n = static_cast<int>(cfg.get_long("n", s.n));
    s.phi1 = cfg.get_double("phi1", s.phi1);
    s.phi2 = cfg.get_double("phi2", s.phi2);
    s.hs = int_list(cfg, "hs", s.hs);
    s.reps = reps_of(cfg, s.reps);
    s.seed = seed_of(cfg);
    s.threads = threads;
    const Fig1Result r = run_fig1(s);
    emit("fig1_points", fig1_table(r));
    emit("fig1_summary", fig1_summary_table(r));
  } else if (name == "fig2") {
    Fig2Spec s;
    s.n = static_cast<int>(cfg.get_long("n", s.n));
    s.phi1 = cfg.get_double("phi1", s.phi1);
    s.phi2 = cfg.get_double("phi2", s.phi2);
    s.m = static_cast<int>(cfg.get_long("m", s.m));
    s.reps = reps_of(cfg, s.reps);
    s.seed = seed_of(cfg);
    s.threads = threads;
    const Fig2Result r = run_fig2(s);
    emit("fig2_points", fig2_table(r));
    emit("fig2_summary", fig2_summary_table(r));
  } else if (name == "deletion") {
    DeletionSpec s;
    s.ns = int_list(cfg, "ns", s.ns);
    if (cfg.has("ks")) {
      s.ks.clear();
      for (long v : cfg.get_long_list("ks")) s.ks.push_back(v);
    }
    s.add_quarter = cfg.get_bool("add_quarter", s.add_quarter);
    s.m = static_cast<int>(cfg.get_long("m", s.m));
    s.masks = static_cast<int>(cfg.get_long("masks", s.masks));
    s.seed = seed_of(cfg);
    emit(name, deletion_table(run_deletion(s)));
  } else if (name == "thinning") {
    ThinningSpec s;
    s.ns = int_list(cfg, "ns", s.ns);
    s.a = cfg.get_double("a", s.a);
    s.a_control = cfg.get_double("a_control", s.a_control);
    s.phi2 = cfg.get_double("phi2", s.phi2);
    s.reps = reps_of(cfg, s.reps);
    s.seed = seed_of(cfg);
    emit(name, thinning_table(run_thinning(s)));
  } else if (name == "jitter") {
    JitterSpec s;
    s.ns = int_list(cfg, "ns", s.ns);
    s.c = cfg.get_double("c", s.c);
    s.nu = cfg.get_double("nu", s.nu);
    s.sigma2 = cfg.get_double("sigma2", s.sigma2);
    s.rho = cfg.get_double("rho", s.rho);
    s.m = static_cast<int>(cfg.get_long("m", s.m));
    s.reps = reps_of(cfg, s.reps);
    s.seed = seed_of(cfg);
    emit(name, jitter_table(run_jitter(s)));
  } else if (name == "matern") {
    MisspecSpec s;
    s.n = static_cast<int>(cfg.get_long("n", s.n));
    s.m = static_cast<int>(cfg.get_long("m", s.m));
    s.nu = cfg.get_double("nu", s.nu);
    s.sigma2 = cfg.get_double("sigma2", s.sigma2);
    s.rho = cfg.get_double("rho", s.rho);
    s.reps = reps_of(cfg, s.reps);
    s.seed = seed_of(cfg);
    emit(name, misspec_table(run_misspec(s)));
  } else if (name == "trimming") {
    const std::vector<int> ns = int_list(cfg, "ns", {20, 40, 80});
    const int m = static_cast<int>(cfg.get_long("m", 1));
    const std::vector<double> phi2s = double_list(cfg, "phi2s", {0.5});
    emit(name, trimming_table(run_trimming(ns, m, phi2s)));
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  return files;
}

}  // namespace rfqv
