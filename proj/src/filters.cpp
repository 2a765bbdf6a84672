#include "rfqv/filters.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace rfqv {
namespace {

std::vector<int> binomial_row(int m) {
  std::vector<int> b(m + 1, 1);
  for (int k = 1; k <= m; ++k) b[k] = b[k - 1] * (m - k + 1) / k;
  return b;
}

void check_filter_args(int n, int m, int j) {
  if (m < 1) throw std::invalid_argument("filters: order m must be >= 1");
  if (j < 1) throw std::invalid_argument("filters: step j must be >= 1");
  if (n <= j * m) throw std::invalid_argument("filters: grid side too small for filter support");
}

}  // namespace

Stencil Stencil::make(int m, int j) {
  check_filter_args(j * m + 1, m, j);
  Stencil s;
  s.m = m;
  s.j = j;
  s.coeffs.resize(static_cast<std::size_t>(m + 1) * (m + 1));
  const auto b = binomial_row(m);
  for (int a1 = 0; a1 <= m; ++a1)
    for (int a2 = 0; a2 <= m; ++a2) {
      const int sign = ((a1 + a2) % 2 == 0) ? 1 : -1;
      s.coeffs[a1 * (m + 1) + a2] = sign * b[a1] * b[a2];
    }
  return s;
}

int Stencil::abs_sum() const {
  int acc = 0;
  for (int c : coeffs) acc += std::abs(c);
  return acc;
}

int Stencil::sq_sum() const {
  int acc = 0;
  for (int c : coeffs) acc += c * c;
  return acc;
}

std::complex<double> symbol_g(int m, int j, double l1, double l2) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> f1 = 1.0 - std::exp(i * (j * l1));
  const std::complex<double> f2 = 1.0 - std::exp(i * (j * l2));
  return std::pow(f1, m) * std::pow(f2, m);
}

double symbol_g_sq(int m, int j, double l1, double l2) {
  const double s1 = std::sin(0.5 * j * l1);
  const double s2 = std::sin(0.5 * j * l2);
  return std::pow(4.0 * s1 * s1, m) * std::pow(4.0 * s2 * s2, m);
}

std::complex<double> symbol_h(int m, double l1, double l2) {
  const std::complex<double> i(0.0, 1.0);
  return std::pow(1.0 + std::exp(i * l1), m) * std::pow(1.0 + std::exp(i * l2), m);
}

double symbol_b(int m, double l1, double l2) {
  const double c1 = 2.0 * std::cos(0.5 * l1);
  const double c2 = 2.0 * std::cos(0.5 * l2);
  return std::pow(c1 * c1, m) * std::pow(c2 * c2, m);
}

Grid apply_filter(const Grid& x, int m, int j) {
  check_filter_args(x.n, m, j);
  // Step 2 goes through the step-1 factorization so the block-sum identity
  // holds bit for bit, matching how the variation statistics are computed.
  if (j == 2) return block_sum(apply_filter(x, m, 1), m);
  const int side = x.n - j * m;
  const Stencil st = Stencil::make(m, j);
  Grid out(side);
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) {
      double acc = 0.0;
      for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m; ++a2)
          acc += st.coeff(a1, a2) * x.at(t1 + j * a1, t2 + j * a2);
      out.at(t1, t2) = acc;
    }
  return out;
}

Grid block_sum(const Grid& z, int m) {
  check_filter_args(z.n, m, 1);
  const int side = z.n - m;
  const auto b = binomial_row(m);
  Grid out(side);
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) {
      double acc = 0.0;
      for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m; ++a2)
          acc += b[a1] * b[a2] * z.at(t1 + a1, t2 + a2);
      out.at(t1, t2) = acc;
    }
  return out;
}

namespace {

double mean_square_window(const Grid& g, int side) {
  if (side < 1 || side > g.n)
    throw std::invalid_argument("filters: variation window exceeds filtered grid");
  double acc = 0.0;
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) {
      const double y = g.at(t1, t2);
      acc += y * y;
    }
  return acc / (static_cast<double>(side) * side);
}

}  // namespace

QvStats quadratic_variations_filtered(const Grid& d1, int n_raw, int m, TrimMode mode) {
  if (d1.n != n_raw - m)
    throw std::invalid_argument("filters: filtered grid side does not match n_raw - m");
  const int min_side = (mode == TrimMode::per_step) ? 4 * m + 1 : 2 * m + 1;
  if (n_raw < min_side)
    throw std::invalid_argument("filters: grid side too small for both variation steps");

  QvStats s;
  s.m = m;
  s.trim_mode = mode;
  const int w1 = n_raw - 2 * m;
  const int w2 = (mode == TrimMode::per_step) ? n_raw - 4 * m : n_raw - 2 * m;

  s.q1 = mean_square_window(d1, w1);
  const Grid d2 = block_sum(d1, m);  // step-2 filtered field, side n_raw - 2m
  s.q2 = mean_square_window(d2, w2);
  s.m1 = static_cast<long>(w1) * w1;
  s.m2 = static_cast<long>(w2) * w2;
  s.degenerate = (s.q1 == 0.0 || s.q2 == 0.0);
  return s;
}

QvStats quadratic_variations(const Grid& x, int m, TrimMode mode) {
  return quadratic_variations_filtered(apply_filter(x, m, 1), x.n, m, mode);
}

QvStats torus_quadratic_variations(const Grid& y, int m) {
  if (y.n < 2 * m + 1)
    throw std::invalid_argument("filters: torus grid side too small for block sum");
  const int n = y.n;
  const auto b = binomial_row(m);
  QvStats s;
  s.m = m;
  s.trim_mode = TrimMode::common;
  s.m1 = s.m2 = static_cast<long>(n) * n;

  double acc1 = 0.0, acc2 = 0.0;
  for (int t1 = 0; t1 < n; ++t1)
    for (int t2 = 0; t2 < n; ++t2) {
      const double v = y.at(t1, t2);
      acc1 += v * v;
      double w = 0.0;
      for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m; ++a2)
          w += b[a1] * b[a2] * y.at((t1 + a1) % n, (t2 + a2) % n);
      acc2 += w * w;
    }
  s.q1 = acc1 / s.m1;
  s.q2 = acc2 / s.m2;
  s.degenerate = (s.q1 == 0.0 || s.q2 == 0.0);
  return s;
}

FilterMatrix build_filter_matrix(int n, int m, int j) {
  check_filter_args(n, m, j);
  if (n > kFilterMatrixCap)
    throw std::invalid_argument("filters: explicit filter matrices are capped at side 64");
  const int side = n - 2 * j * m;
  if (side < 1)
    throw std::invalid_argument("filters: no interior anchors at this side and step");

  const Stencil st = Stencil::make(m, j);
  FilterMatrix fm;
  fm.n = n;
  fm.m = m;
  fm.j = j;
  fm.f.resize(static_cast<long>(side) * side, static_cast<long>(n) * n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(side) * side * (m + 1) * (m + 1));
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) {
      const long row = static_cast<long>(t1) * side + t2;
      for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m; ++a2) {
          const long col = static_cast<long>(t1 + j * a1) * n + (t2 + j * a2);
          trips.emplace_back(row, col, static_cast<double>(st.coeff(a1, a2)));
        }
    }
  fm.f.setFromTriplets(trips.begin(), trips.end());
  return fm;
}

Eigen::SparseMatrix<double> FilterMatrix::quad_form() const {
  Eigen::SparseMatrix<double> a = Eigen::SparseMatrix<double>(f.transpose()) * f;
  a /= static_cast<double>(f.rows());
  return a;
}

Eigen::SparseMatrix<double> block_sum_matrix(int n, int m) {
  check_filter_args(n, m, 2);
  if (n > kFilterMatrixCap)
    throw std::invalid_argument("filters: explicit filter matrices are capped at side 64");
  const int side1 = n - 2 * m;
  const int side2 = n - 4 * m;
  if (side2 < 1)
    throw std::invalid_argument("filters: no step-2 anchors at this side");
  const auto b = binomial_row(m);
  Eigen::SparseMatrix<double> h(static_cast<long>(side2) * side2,
                                static_cast<long>(side1) * side1);
  std::vector<Eigen::Triplet<double>> trips;
  for (int t1 = 0; t1 < side2; ++t1)
    for (int t2 = 0; t2 < side2; ++t2) {
      const long row = static_cast<long>(t1) * side2 + t2;
      for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m; ++a2) {
          const long col = static_cast<long>(t1 + a1) * side1 + (t2 + a2);
          trips.emplace_back(row, col, static_cast<double>(b[a1] * b[a2]));
        }
    }
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

Eigen::SparseMatrix<double> assemble_B(double alpha, double beta, int n, int m) {
  const int side1 = n - 2 * m;
  const int side2 = n - 4 * m;
  if (side2 < 1)
    throw std::invalid_argument("filters: no step-2 anchors at this side");
  const long m1 = static_cast<long>(side1) * side1;
  const long m2 = static_cast<long>(side2) * side2;
  const Eigen::SparseMatrix<double> h = block_sum_matrix(n, m);
  Eigen::SparseMatrix<double> bmat(m1, m1);
  bmat.setIdentity();
  bmat *= alpha / static_cast<double>(m1);
  bmat += (beta / static_cast<double>(m2)) *
          (Eigen::SparseMatrix<double>(h.transpose()) * h);
  return bmat;
}

}  // namespace rfqv
