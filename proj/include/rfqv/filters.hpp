#pragma once

#include <complex>
#include <vector>

#include <Eigen/SparseCore>

namespace rfqv {

// Square lattice sample, row-major: v[t1 * n + t2].
struct Grid {
  int n = 0;
  std::vector<double> v;

  Grid() = default;
  explicit Grid(int side, double fill = 0.0)
      : n(side), v(static_cast<std::size_t>(side) * side, fill) {}

  double& at(int t1, int t2) { return v[static_cast<std::size_t>(t1) * n + t2]; }
  double at(int t1, int t2) const { return v[static_cast<std::size_t>(t1) * n + t2]; }
  long size() const { return static_cast<long>(n) * n; }
};

// Bilinear difference stencil of order m at step j: weights
// c_(a1,a2) = (-1)^(a1+a2) binom(m,a1) binom(m,a2) applied at offsets j*(a1,a2).
struct Stencil {
  int m = 1;
  int j = 1;
  std::vector<int> coeffs;  // (m+1)^2 entries, index a1*(m+1)+a2

  static Stencil make(int m, int j);
  int coeff(int a1, int a2) const { return coeffs[a1 * (m + 1) + a2]; }
  int abs_sum() const;  // sum |c| = 4^m
  int sq_sum() const;   // sum c^2
};

// Frequency symbols. Conventions: forward DFT sum X_t e^(-i l.t), so a filter
// sum_a c_a X_(t+a) multiplies the transform by sum_a c_a e^(i l.a).
std::complex<double> symbol_g(int m, int j, double l1, double l2);   // (1-e^(ijl1))^m (1-e^(ijl2))^m
double symbol_g_sq(int m, int j, double l1, double l2);              // 4^(2m) sin^2m sin^2m
std::complex<double> symbol_h(int m, double l1, double l2);          // (1+e^(il1))^m (1+e^(il2))^m
double symbol_b(int m, double l1, double l2);                        // |h|^2

// Filtered grid on the tight interior: output side n - j*m, anchored at 0.
Grid apply_filter(const Grid& x, int m, int j);

// Block sum (H Z)_t = sum_alpha binom(m,a1) binom(m,a2) Z_(t+alpha); side shrinks by m.
// Satisfies apply_filter(x, m, 2) == block_sum(apply_filter(x, m, 1), m) exactly.
Grid block_sum(const Grid& z, int m);

// Index-window conventions for the two quadratic variations. Windows are
// anchored at 0 in raw-lattice anchor coordinates:
//   per_step: Q_j averaged over side n-2jm (so M_1 = (n-2m)^2, M_2 = (n-4m)^2);
//   common:   both averaged over the tight step-2 interior, side n-2m.
enum class TrimMode { per_step, common };

struct QvStats {
  double q1 = 0.0;
  double q2 = 0.0;
  long m1 = 0;
  long m2 = 0;
  int m = 0;
  TrimMode trim_mode = TrimMode::per_step;
  bool degenerate = false;  // a Q vanished; ratio estimators must refuse this
};

QvStats quadratic_variations(const Grid& x, int m, TrimMode mode);

// Same, starting from an already filtered step-1 grid of side n_raw - m.
QvStats quadratic_variations_filtered(const Grid& d1, int n_raw, int m, TrimMode mode);

// Periodic variant for torus fields: both sums run over all n^2 sites with
// wraparound block sums and divisor N.
QvStats torus_quadratic_variations(const Grid& y, int m);

// Explicit sparse filter matrices, verification scale only.
inline constexpr int kFilterMatrixCap = 64;

struct FilterMatrix {
  int n = 0;
  int m = 0;
  int j = 0;
  Eigen::SparseMatrix<double> f;  // (n-2jm)^2 rows, n^2 columns
  long rows() const { return f.rows(); }
  long cols() const { return f.cols(); }
  Eigen::SparseMatrix<double> quad_form() const;  // F^T F / rows
};

FilterMatrix build_filter_matrix(int n, int m, int j);

// H as a matrix from step-1 rows (side n-2m) to step-2 rows (side n-4m):
// build_filter_matrix(n,m,2).f == block_sum_matrix(n,m) * build_filter_matrix(n,m,1).f.
Eigen::SparseMatrix<double> block_sum_matrix(int n, int m);

// B_(alpha,beta) = (alpha/M1) I + (beta/M2) H^T H on step-1 filtered vectors:
// x^T B x = alpha Q1 + beta Q2 for x the step-1 filtered field on its window.
Eigen::SparseMatrix<double> assemble_B(double alpha, double beta, int n, int m);

}  // namespace rfqv
