#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfqv/filters.hpp"
#include "rfqv/gcmodel.hpp"
#include "rfqv/rng.hpp"

namespace rfqv {

// Named RNG sub-streams so that optional randomness (jitter, masks) never
// shifts the draws used for field values.
inline constexpr std::uint64_t kStreamValues = 1;
inline constexpr std::uint64_t kStreamJitter = 2;
inline constexpr std::uint64_t kStreamMask = 3;

struct ModelSpec {
  enum class Kind { power_law, matern };
  Kind kind = Kind::power_law;
  PowerLawParams pl;
  MaternParams mat;

  static ModelSpec power_law(const PowerLawParams& p);
  static ModelSpec matern(const MaternParams& q);

  // Generalized covariance at lag h: the power-law kernel, or the Matern
  // covariance (an ordinary covariance is also a generalized one).
  double gc(double h1, double h2) const;
};

// Covariance of order-m step-j/k filter outputs at anchor lag u.
double filtered_cov(double u1, double u2, int m, int j, const ModelSpec& model);
double filtered_cross_cov(double u1, double u2, int m, int j, int k, const ModelSpec& model);

// Dense Cholesky sampler with a small diagonal-ridge ladder (0, 1e-12, 1e-10
// times mean diagonal). Construction factors once; draws are reusable across
// replicates. Throws with the smallest-eigenvalue diagnostic if all fail.
class GaussianSampler {
 public:
  explicit GaussianSampler(Eigen::MatrixXd cov);
  long dim() const { return chol_.rows(); }
  double applied_ridge() const { return ridge_; }
  Eigen::VectorXd draw(Rng& rng) const;

 private:
  Eigen::MatrixXd chol_;  // lower factor
  double ridge_ = 0.0;
};

Grid vector_to_grid(const Eigen::VectorXd& v, int side);

// Covariance of the tight step-1 filtered field D X on anchors {0..n-m-1}^2.
Eigen::MatrixXd filtered_cov_matrix(int n, int m, const ModelSpec& model);

// Covariance of X anchored at lattice sites: order 0 pins X(0,0) = 0; order 1
// additionally removes the plane through (0,0), (1,0), (0,1). Power-law only.
// Rows and columns of the anchor sites are exactly zero.
Eigen::MatrixXd anchored_cov_matrix(int n, const PowerLawParams& p, int irf_order);

// Stationary covariance over arbitrary planar locations.
Eigen::MatrixXd locations_cov_matrix(const std::vector<std::array<double, 2>>& pts,
                                     const MaternParams& q);

// Circulant covariance of the stationary periodic filtered field on Z_n^2
// whose spectrum is |g_m(l)|^2 f_X(l) at the Fourier frequencies (zero at DC).
Eigen::MatrixXd torus_filtered_cov_matrix(int n, int m, const ModelSpec& model,
                                          int truncation = 30);

// Samplers wired to the builders above. Anchored draws return the full n x n
// grid with exact zeros at the anchors.
class AnchoredSampler {
 public:
  AnchoredSampler(int n, const PowerLawParams& p, int irf_order);
  int side() const { return n_; }
  Grid draw(Rng& rng) const;

 private:
  int n_;
  std::vector<long> anchors_;
  GaussianSampler inner_;
};

// Lattice points t/n jittered by iid uniforms on [-c/n, c/n]^2.
std::vector<std::array<double, 2>> unit_lattice_locations(int n, double spacing_denom);
std::vector<std::array<double, 2>> jitter_locations(const std::vector<std::array<double, 2>>& pts,
                                                    double c, int n, Rng& rng);

// Binary field format: magic "RSF1", then n, m, mode, seed as little-endian
// u64, then n*n row-major IEEE doubles.
struct FieldFile {
  Grid grid;
  std::uint64_t m = 0;
  std::uint64_t mode = 0;
  std::uint64_t seed = 0;
};

void write_rsf1(const std::string& path, const FieldFile& f);
FieldFile read_rsf1(const std::string& path);
void write_field_csv(const std::string& path, const Grid& g);
Grid read_field_csv(const std::string& path);

}  // namespace rfqv
