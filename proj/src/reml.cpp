#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "rfqv/estimate.hpp"
#include "rfqv/fieldsim.hpp"
#include "rfqv/gcmodel.hpp"
#include "rfqv/optimize.hpp"

namespace rfqv {
namespace {

void check_reml_geometry(int n_raw, const RemlOptions& opt, int* side_out) {
  if (opt.m < 1) throw std::invalid_argument("reml: order m must be >= 1");
  const int side = n_raw - 2 * opt.m;
  if (side < 2) throw std::invalid_argument("reml: grid side too small for the window");
  const long dim = static_cast<long>(side) * side;
  if (dim > kRemlDimCap)
    throw std::invalid_argument("reml: window dimension exceeds the dense-likelihood cap");
  if (!(opt.edge > 0.0) || !(opt.edge < 0.5 * opt.m))
    throw std::invalid_argument("reml: bad search edge");
  *side_out = side;
}

// Covariance of the filtered window at unit amplitude.
Eigen::MatrixXd window_cov(int side, int m, double phi2) {
  const ModelSpec model = ModelSpec::power_law({1.0, phi2});
  const int lags = 2 * side - 1;
  std::vector<double> table(static_cast<std::size_t>(lags) * lags);
  for (int u1 = -(side - 1); u1 <= side - 1; ++u1)
    for (int u2 = -(side - 1); u2 <= side - 1; ++u2)
      table[static_cast<std::size_t>(u1 + side - 1) * lags + (u2 + side - 1)] =
          filtered_cov(u1, u2, m, 1, model);
  const long dim = static_cast<long>(side) * side;
  Eigen::MatrixXd cov(dim, dim);
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) {
      const long row = static_cast<long>(t1) * side + t2;
      for (int s1 = 0; s1 < side; ++s1)
        for (int s2 = 0; s2 < side; ++s2)
          cov(row, static_cast<long>(s1) * side + s2) =
              table[static_cast<std::size_t>(t1 - s1 + side - 1) * lags + (t2 - s2 + side - 1)];
    }
  return cov;
}

Eigen::LLT<Eigen::MatrixXd> factor_window_cov(int side, int m, double phi2) {
  Eigen::LLT<Eigen::MatrixXd> llt(window_cov(side, m, phi2));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("reml: window covariance failed to factor at phi2 = " +
                             std::to_string(phi2));
  return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Profile objective and the profiled amplitude for one factored covariance.
double profile_objective(const Eigen::LLT<Eigen::MatrixXd>& llt, double ldet,
                         const Eigen::VectorXd& y, double* amp_out) {
  const Eigen::VectorXd half = llt.matrixL().solve(y);
  const double qf = half.squaredNorm();
  const double dim = static_cast<double>(y.size());
  if (amp_out) *amp_out = qf / dim;
  return 0.5 * (ldet + dim * std::log(qf / dim));
}

Eigen::VectorXd window_vector(const Grid& d1, int side, double* msq_out) {
  if (d1.n < side) throw std::invalid_argument("reml: filtered grid smaller than the window");
  Eigen::VectorXd y(static_cast<long>(side) * side);
  for (int t1 = 0; t1 < side; ++t1)
    for (int t2 = 0; t2 < side; ++t2) y[static_cast<long>(t1) * side + t2] = d1.at(t1, t2);
  const double msq = y.squaredNorm() / static_cast<double>(y.size());
  if (!(msq > 0.0)) throw std::invalid_argument("reml: degenerate (constant) window");
  y /= std::sqrt(msq);
  *msq_out = msq;
  return y;
}

}  // namespace

RemlFit reml_estimate(const Grid& x, const RemlOptions& opt) {
  int side = 0;
  check_reml_geometry(x.n, opt, &side);
  double msq = 0.0;
  const Eigen::VectorXd y = window_vector(apply_filter(x, opt.m, 1), side, &msq);

  const auto obj = [&](double phi2) {
    const auto llt = factor_window_cov(side, opt.m, phi2);
    return profile_objective(llt, log_det(llt), y, nullptr);
  };
  const MinimizeResult r =
      minimize_scan_brent(obj, opt.edge, opt.m - opt.edge, opt.scan_step, opt.brent_tol);

  RemlFit fit;
  fit.phi2_hat = r.x;
  fit.objective = r.fx;
  const auto llt = factor_window_cov(side, opt.m, r.x);
  double amp = 0.0;
  profile_objective(llt, log_det(llt), y, &amp);
  fit.phi1_hat = msq * amp;
  return fit;
}

RemlGridEstimator::RemlGridEstimator(int n_raw, const RemlOptions& opt)
    : n_raw_(n_raw), side_(0), opt_(opt) {
  check_reml_geometry(n_raw, opt, &side_);
  for (double p = opt.edge; p < opt.m - opt.edge + 1e-12; p += opt.scan_step)
    grid_.push_back(std::min(p, opt.m - opt.edge));
  if (grid_.size() < 3) throw std::invalid_argument("reml: scan grid too coarse");
}

std::vector<RemlFit> RemlGridEstimator::fit_all(const std::vector<Grid>& d1_fields) const {
  const std::size_t reps = d1_fields.size();
  const std::size_t pts = grid_.size();
  std::vector<Eigen::VectorXd> ys(reps);
  std::vector<double> msq(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    if (d1_fields[r].n != n_raw_ - opt_.m)
      throw std::invalid_argument("reml: filtered grid side does not match the estimator");
    ys[r] = window_vector(d1_fields[r], side_, &msq[r]);
  }

  // One factorization per grid point, streamed over all replicates.
  std::vector<double> curve(reps * pts);
  std::vector<double> amp(reps * pts);
  for (std::size_t i = 0; i < pts; ++i) {
    const auto llt = factor_window_cov(side_, opt_.m, grid_[i]);
    const double ldet = log_det(llt);
    for (std::size_t r = 0; r < reps; ++r)
      curve[r * pts + i] = profile_objective(llt, ldet, ys[r], &amp[r * pts + i]);
  }

  std::vector<RemlFit> fits(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts; ++i)
      if (curve[r * pts + i] < curve[r * pts + best]) best = i;
    double phi2 = grid_[best];
    double fx = curve[r * pts + best];
    if (best > 0 && best + 1 < pts) {
      // Parabolic refinement through the minimum and its neighbors.
      const double fm = curve[r * pts + best - 1], f0 = fx, fp = curve[r * pts + best + 1];
      const double denom = fm - 2.0 * f0 + fp;
      if (denom > 0.0) {
        const double shift = 0.5 * (fm - fp) / denom;
        phi2 += shift * opt_.scan_step;
        fx = f0 - 0.25 * (fm - fp) * shift;
      }
    }
    fits[r].phi2_hat = phi2;
    fits[r].objective = fx;
    fits[r].phi1_hat = msq[r] * amp[r * pts + best];
  }
  return fits;
}

double RemlGridEstimator::fisher_sd(double phi2) const {
  const double delta = 1e-4;
  const Eigen::MatrixXd sm = window_cov(side_, opt_.m, phi2 - delta);
  const Eigen::MatrixXd sp = window_cov(side_, opt_.m, phi2 + delta);
  const Eigen::MatrixXd ds = (sp - sm) / (2.0 * delta);
  const auto llt = factor_window_cov(side_, opt_.m, phi2);

  // B = L^-1 dS L^-T shares its spectrum with T = S^-1 dS.
  Eigen::MatrixXd b = llt.matrixL().solve(ds);
  b = llt.matrixL().solve(b.transpose().eval());
  const double dim = static_cast<double>(b.rows());
  const double tr = b.trace();
  const double tr2 = b.squaredNorm();  // tr(B B^T) = tr(B^2) by symmetry
  const double info = 0.5 * tr2 - 0.5 * tr * tr / dim;
  if (!(info > 0.0)) throw std::runtime_error("reml: non-positive profile information");
  return 1.0 / std::sqrt(info);
}

}  // namespace rfqv
