#include "rfqv/fieldsim.hpp"

#include "rfqv/lattice_spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace rfqv {

ModelSpec ModelSpec::power_law(const PowerLawParams& p) {
  p.validate();
  ModelSpec s;
  s.kind = Kind::power_law;
  s.pl = p;
  return s;
}

ModelSpec ModelSpec::matern(const MaternParams& q) {
  q.validate();
  ModelSpec s;
  s.kind = Kind::matern;
  s.mat = q;
  return s;
}

double ModelSpec::gc(double h1, double h2) const {
  if (kind == Kind::power_law) return gc_powerlaw(h1, h2, pl);
  return matern_cov(std::hypot(h1, h2), mat);
}

double filtered_cross_cov(double u1, double u2, int m, int j, int k, const ModelSpec& model) {
  const Stencil sj = Stencil::make(m, 1);  // coefficients do not depend on the step
  double acc = 0.0;
  for (int a1 = 0; a1 <= m; ++a1)
    for (int a2 = 0; a2 <= m; ++a2) {
      const int ca = sj.coeff(a1, a2);
      for (int b1 = 0; b1 <= m; ++b1)
        for (int b2 = 0; b2 <= m; ++b2) {
          const int cb = sj.coeff(b1, b2);
          acc += ca * cb * model.gc(u1 + j * a1 - k * b1, u2 + j * a2 - k * b2);
        }
    }
  return acc;
}

double filtered_cov(double u1, double u2, int m, int j, const ModelSpec& model) {
  return filtered_cross_cov(u1, u2, m, j, j, model);
}

namespace {

constexpr double kRidgeLadder[] = {0.0, 1e-12, 1e-10};

}  // namespace

GaussianSampler::GaussianSampler(Eigen::MatrixXd cov) {
  if (cov.rows() != cov.cols() || cov.rows() < 1)
    throw std::invalid_argument("fieldsim: covariance matrix must be square and non-empty");
  const double mean_diag = cov.trace() / static_cast<double>(cov.rows());
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (double scale : kRidgeLadder) {
    Eigen::MatrixXd work = cov;
    if (scale > 0.0) work.diagonal().array() += scale * mean_diag;
    llt.compute(work);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      ridge_ = scale * mean_diag;
      return;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  throw std::runtime_error(
      "fieldsim: covariance not positive definite even after ridge 1e-10; "
      "smallest eigenvalue = " +
      std::to_string(es.eigenvalues().minCoeff()));
}

Eigen::VectorXd GaussianSampler::draw(Rng& rng) const {
  Eigen::VectorXd z(chol_.rows());
  for (long i = 0; i < z.size(); ++i) z[i] = rng.next_normal();
  return chol_.triangularView<Eigen::Lower>() * z;
}

Grid vector_to_grid(const Eigen::VectorXd& v, int side) {
  if (v.size() != static_cast<long>(side) * side)
    throw std::invalid_argument("fieldsim: vector length is not a square grid");
  Grid g(side);
  for (long i = 0; i < v.size(); ++i) g.v[static_cast<std::size_t>(i)] = v[i];
  return g;
}

Eigen::MatrixXd filtered_cov_matrix(int n, int m, const ModelSpec& model) {
  const int side = n - m;
  if (side < 1) throw std::invalid_argument("fieldsim: grid side too small for filter");
  const long dim = static_cast<long>(side) * side;

  // One filtered-covariance evaluation per lag, then table lookups.
  const int lags = 2 * side - 1;
  std::vector<double> table(static_cast<std::size_t>(lags) * lags);
  for (int u1 = -(side - 1); u1 <= side - 1; ++u1)
    for (int u2 = -(side - 1); u2 <= side - 1; ++u2)
      table[static_cast<std::size_t>(u1 + side - 1) * lags + (u2 + side - 1)] =
          filtered_cov(u1, u2, m, 1, model);

  Eigen::MatrixXd cov(dim, dim);
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) {
      const long row = static_cast<long>(t1) * side + t2;
      for (int s1 = 0; s1 < side; ++s1)
        for (int s2 = 0; s2 < side; ++s2) {
          const long col = static_cast<long>(s1) * side + s2;
          cov(row, col) =
              table[static_cast<std::size_t>(t1 - s1 + side - 1) * lags + (t2 - s2 + side - 1)];
        }
    }
  return cov;
}

namespace {

// Weights of the anchored field at site t as an increment of the underlying
// intrinsic field: +1 at t, minus the interpolation weights at the anchors.
struct IncrementWeights {
  std::array<std::array<int, 2>, 4> pos;
  std::array<double, 4> w;
  int count = 0;
};

IncrementWeights anchored_weights(int t1, int t2, int irf_order) {
  IncrementWeights iw;
  if (irf_order == 0) {
    iw.count = 2;
    iw.pos[0] = {t1, t2};
    iw.w[0] = 1.0;
    iw.pos[1] = {0, 0};
    iw.w[1] = -1.0;
  } else {
    iw.count = 4;
    iw.pos[0] = {t1, t2};
    iw.w[0] = 1.0;
    iw.pos[1] = {0, 0};
    iw.w[1] = -(1.0 - t1 - t2);
    iw.pos[2] = {1, 0};
    iw.w[2] = -static_cast<double>(t1);
    iw.pos[3] = {0, 1};
    iw.w[3] = -static_cast<double>(t2);
  }
  return iw;
}

}  // namespace

Eigen::MatrixXd anchored_cov_matrix(int n, const PowerLawParams& p, int irf_order) {
  p.validate();
  if (irf_order != 0 && irf_order != 1)
    throw std::invalid_argument("fieldsim: anchored representation supports orders 0 and 1");
  if (irf_order == 0 && p.phi2 >= 1.0)
    throw std::invalid_argument("fieldsim: order-0 anchoring needs phi2 in (0,1)");
  if (irf_order == 1 && p.phi2 <= 1.0)
    throw std::invalid_argument("fieldsim: order-1 anchoring needs phi2 in (1,2)");
  if (n < 2) throw std::invalid_argument("fieldsim: grid side must be at least 2");

  const int lags = 2 * n - 1;
  std::vector<double> ktab(static_cast<std::size_t>(lags) * lags);
  for (int u1 = -(n - 1); u1 <= n - 1; ++u1)
    for (int u2 = -(n - 1); u2 <= n - 1; ++u2)
      ktab[static_cast<std::size_t>(u1 + n - 1) * lags + (u2 + n - 1)] =
          gc_powerlaw(u1, u2, p);
  const auto k_at = [&](int u1, int u2) {
    return ktab[static_cast<std::size_t>(u1 + n - 1) * lags + (u2 + n - 1)];
  };

  const long dim = static_cast<long>(n) * n;
  Eigen::MatrixXd cov(dim, dim);
  std::vector<IncrementWeights> ws(static_cast<std::size_t>(dim));
  for (int t1 = 0; t1 < n; ++t1)
    for (int t2 = 0; t2 < n; ++t2)
      ws[static_cast<std::size_t>(t1) * n + t2] = anchored_weights(t1, t2, irf_order);

  for (long r = 0; r < dim; ++r) {
    const auto& a = ws[static_cast<std::size_t>(r)];
    for (long c = r; c < dim; ++c) {
      const auto& b = ws[static_cast<std::size_t>(c)];
      double acc = 0.0;
      for (int i = 0; i < a.count; ++i)
        for (int j = 0; j < b.count; ++j)
          acc += a.w[i] * b.w[j] * k_at(a.pos[i][0] - b.pos[j][0], a.pos[i][1] - b.pos[j][1]);
      cov(r, c) = acc;
      cov(c, r) = acc;
    }
  }
  // The anchor weights cancel identically, but the kernel sums leave rounding
  // residue; pin the anchor rows and columns to the exact zeros they represent.
  const std::vector<long> anchors =
      irf_order == 0 ? std::vector<long>{0} : std::vector<long>{0, static_cast<long>(n), 1};
  for (long a : anchors) {
    cov.row(a).setZero();
    cov.col(a).setZero();
  }
  return cov;
}

Eigen::MatrixXd locations_cov_matrix(const std::vector<std::array<double, 2>>& pts,
                                     const MaternParams& q) {
  q.validate();
  const long dim = static_cast<long>(pts.size());
  if (dim < 1) throw std::invalid_argument("fieldsim: empty location set");
  Eigen::MatrixXd cov(dim, dim);
  for (long r = 0; r < dim; ++r)
    for (long c = r; c < dim; ++c) {
      const double d = std::hypot(pts[r][0] - pts[c][0], pts[r][1] - pts[c][1]);
      const double v = matern_cov(d, q);
      cov(r, c) = v;
      cov(c, r) = v;
    }
  return cov;
}

Eigen::MatrixXd torus_filtered_cov_matrix(int n, int m, const ModelSpec& model, int truncation) {
  if (n < 2 * m + 1)
    throw std::invalid_argument("fieldsim: torus side too small for the filter order");
  const LatticeSpectrum spec =
      model.kind == ModelSpec::Kind::power_law
          ? LatticeSpectrum(model.pl, truncation)
          : LatticeSpectrum(model.mat, truncation);

  const long dim = static_cast<long>(n) * n;
  const double two_pi = 2.0 * std::acos(-1.0);
  std::vector<double> lambda(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double l = two_pi * k / n;
    if (l > std::acos(-1.0)) l -= two_pi;
    lambda[static_cast<std::size_t>(k)] = l;
  }
  std::vector<double> spec_f(static_cast<std::size_t>(dim), 0.0);
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < n; ++k2) {
      if (k1 == 0 && k2 == 0) continue;  // DC is annihilated by the filter
      const double l1 = lambda[static_cast<std::size_t>(k1)];
      const double l2 = lambda[static_cast<std::size_t>(k2)];
      spec_f[static_cast<std::size_t>(k1) * n + k2] = symbol_g_sq(m, 1, l1, l2) * spec(l1, l2);
    }

  std::vector<double> ct(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) ct[static_cast<std::size_t>(j)] = std::cos(two_pi * j / n);

  std::vector<double> r(static_cast<std::size_t>(dim));
  for (int u1 = 0; u1 < n; ++u1)
    for (int u2 = 0; u2 < n; ++u2) {
      double acc = 0.0;
      for (int k1 = 0; k1 < n; ++k1) {
        const std::size_t base = static_cast<std::size_t>(k1) * n;
        const int p1 = (k1 * u1) % n;
        for (int k2 = 0; k2 < n; ++k2)
          acc += spec_f[base + k2] * ct[static_cast<std::size_t>((p1 + k2 * u2) % n)];
      }
      r[static_cast<std::size_t>(u1) * n + u2] = acc / static_cast<double>(dim);
    }

  Eigen::MatrixXd cov(dim, dim);
  for (int t1 = 0; t1 < n; ++t1)
    for (int t2 = 0; t2 < n; ++t2) {
      const long row = static_cast<long>(t1) * n + t2;
      for (int s1 = 0; s1 < n; ++s1)
        for (int s2 = 0; s2 < n; ++s2) {
          const long col = static_cast<long>(s1) * n + s2;
          cov(row, col) =
              r[static_cast<std::size_t>((t1 - s1 + n) % n) * n + (t2 - s2 + n) % n];
        }
    }
  return cov;
}

namespace {

Eigen::MatrixXd carve_non_anchor(const Eigen::MatrixXd& full, const std::vector<long>& anchors,
                                 std::vector<long>* keep_out) {
  std::vector<long> keep;
  keep.reserve(static_cast<std::size_t>(full.rows()));
  for (long i = 0; i < full.rows(); ++i)
    if (std::find(anchors.begin(), anchors.end(), i) == anchors.end()) keep.push_back(i);
  Eigen::MatrixXd red(keep.size(), keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < keep.size(); ++c)
      red(static_cast<long>(r), static_cast<long>(c)) = full(keep[r], keep[c]);
  *keep_out = std::move(keep);
  return red;
}

}  // namespace

AnchoredSampler::AnchoredSampler(int n, const PowerLawParams& p, int irf_order)
    : n_(n),
      anchors_(irf_order == 0 ? std::vector<long>{0}
                              : std::vector<long>{0, static_cast<long>(n), 1}),
      inner_([&] {
        Eigen::MatrixXd full = anchored_cov_matrix(n, p, irf_order);
        std::vector<long> keep;
        const std::vector<long> anch = irf_order == 0
                                           ? std::vector<long>{0}
                                           : std::vector<long>{0, static_cast<long>(n), 1};
        return GaussianSampler(carve_non_anchor(full, anch, &keep));
      }()) {}

Grid AnchoredSampler::draw(Rng& rng) const {
  const Eigen::VectorXd z = inner_.draw(rng);
  Grid g(n_);
  long zi = 0;
  for (long i = 0; i < g.size(); ++i) {
    if (std::find(anchors_.begin(), anchors_.end(), i) != anchors_.end()) {
      g.v[static_cast<std::size_t>(i)] = 0.0;
    } else {
      g.v[static_cast<std::size_t>(i)] = z[zi++];
    }
  }
  return g;
}

std::vector<std::array<double, 2>> unit_lattice_locations(int n, double spacing_denom) {
  if (n < 1 || !(spacing_denom > 0.0))
    throw std::invalid_argument("fieldsim: bad lattice location request");
  std::vector<std::array<double, 2>> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int t1 = 0; t1 < n; ++t1)
    for (int t2 = 0; t2 < n; ++t2)
      pts.push_back({t1 / spacing_denom, t2 / spacing_denom});
  return pts;
}

std::vector<std::array<double, 2>> jitter_locations(const std::vector<std::array<double, 2>>& pts,
                                                    double c, int n, Rng& rng) {
  if (c < 0.0 || c >= 0.5)
    throw std::invalid_argument("fieldsim: jitter amplitude c must lie in [0, 0.5)");
  std::vector<std::array<double, 2>> out = pts;
  const double scale = c / n;
  for (auto& p : out) {
    p[0] += scale * (2.0 * rng.next_uniform() - 1.0);
    p[1] += scale * (2.0 * rng.next_uniform() - 1.0);
  }
  return out;
}

namespace {

void put_u64(std::ofstream& os, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::ifstream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("fieldsim: truncated field file");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return x;
}

}  // namespace

void write_rsf1(const std::string& path, const FieldFile& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("fieldsim: cannot open " + path + " for writing");
  os.write("RSF1", 4);
  put_u64(os, static_cast<std::uint64_t>(f.grid.n));
  put_u64(os, f.m);
  put_u64(os, f.mode);
  put_u64(os, f.seed);
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(f.grid.v.data()),
           static_cast<std::streamsize>(f.grid.v.size() * sizeof(double)));
  if (!os) throw std::runtime_error("fieldsim: write failed for " + path);
}

FieldFile read_rsf1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("fieldsim: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "RSF1", 4) != 0)
    throw std::runtime_error("fieldsim: " + path + " is not an RSF1 field file");
  FieldFile f;
  const std::uint64_t n = get_u64(is);
  if (n == 0 || n > 100000) throw std::runtime_error("fieldsim: implausible grid side in " + path);
  f.m = get_u64(is);
  f.mode = get_u64(is);
  f.seed = get_u64(is);
  f.grid = Grid(static_cast<int>(n));
  is.read(reinterpret_cast<char*>(f.grid.v.data()),
          static_cast<std::streamsize>(f.grid.v.size() * sizeof(double)));
  if (!is) throw std::runtime_error("fieldsim: truncated field data in " + path);
  return f;
}

void write_field_csv(const std::string& path, const Grid& g) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("fieldsim: cannot open " + path + " for writing");
  os << "t1,t2,value\n";
  char buf[32];
  for (int t1 = 0; t1 < g.n; ++t1)
    for (int t2 = 0; t2 < g.n; ++t2) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), g.at(t1, t2));
      os << t1 << ',' << t2 << ',';
      os.write(buf, res.ptr - buf);
      os << '\n';
    }
  if (!os) throw std::runtime_error("fieldsim: write failed for " + path);
}

Grid read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("fieldsim: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("fieldsim: empty field file " + path);
  struct Rec {
    int t1, t2;
    double v;
  };
  std::vector<Rec> recs;
  int max_t = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    Rec r{};
    auto c1 = std::from_chars(p, end, r.t1);
    if (c1.ec != std::errc() || c1.ptr == end || *c1.ptr != ',')
      throw std::runtime_error("fieldsim: bad field row in " + path);
    auto c2 = std::from_chars(c1.ptr + 1, end, r.t2);
    if (c2.ec != std::errc() || c2.ptr == end || *c2.ptr != ',')
      throw std::runtime_error("fieldsim: bad field row in " + path);
    auto c3 = std::from_chars(c2.ptr + 1, end, r.v);
    if (c3.ec != std::errc())
      throw std::runtime_error("fieldsim: bad field value in " + path);
    if (r.t1 < 0 || r.t2 < 0) throw std::runtime_error("fieldsim: negative index in " + path);
    max_t = std::max({max_t, r.t1, r.t2});
    recs.push_back(r);
  }
  const int n = max_t + 1;
  if (n < 1 || recs.size() != static_cast<std::size_t>(n) * n)
    throw std::runtime_error("fieldsim: field in " + path + " is not a complete square grid");
  Grid g(n);
  std::vector<char> seen(static_cast<std::size_t>(n) * n, 0);
  for (const auto& r : recs) {
    const std::size_t idx = static_cast<std::size_t>(r.t1) * n + r.t2;
    if (seen[idx]) throw std::runtime_error("fieldsim: duplicate site in " + path);
    seen[idx] = 1;
    g.v[idx] = r.v;
  }
  return g;
}

}  // namespace rfqv
