#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "coinv/stats/histogram.hpp"
#include "coinv/stats/summary.hpp"

namespace coinv {

// Three-parameter log-normal: X = shift + exp(N(mu, sigma^2)).
struct LogNormalFit {
  double shift = 0.0;
  double mu = 0.0;
  double sigma = 1.0;
  double shift_error = 0.0;
  double mu_error = 0.0;
  double sigma_error = 0.0;
  double ssr = 0.0;  // sum of squared residuals of bin probabilities
  std::size_t bins_used = 0;
  std::size_t iterations = 0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();

  double mean() const { return shift + std::exp(mu + 0.5 * sigma * sigma); }
  double median() const { return shift + std::exp(mu); }
  double mode() const { return shift + std::exp(mu - sigma * sigma); }

  // Mean, median and mode with delta-method standard errors.
  SummaryStats derived() const {
    auto se = [&](const Eigen::Vector3d& grad) { return std::sqrt(std::max(0.0, grad.dot(covariance * grad))); };
    const double em = std::exp(mu + 0.5 * sigma * sigma);
    const double ed = std::exp(mu);
    const double eo = std::exp(mu - sigma * sigma);
    SummaryStats s;
    s.mean = mean();
    s.median = median();
    s.mode = mode();
    s.mean_error = se({1.0, em, sigma * em});
    s.median_error = se({1.0, ed, 0.0});
    s.mode_error = se({1.0, eo, -2.0 * sigma * eo});
    return s;
  }
};

struct LogNormalFitOptions {
  bool exclude_zero_bin = false;
  std::size_t max_iterations = 500;
  double tolerance = 1e-10;  // relative change of the residual sum
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Log-normal CDF at x and its gradient with respect to (shift, mu, sigma).
inline double lognormal_cdf(double x, const Eigen::Vector3d& theta, Eigen::Vector3d* grad) {
  const double shift = theta[0], mu = theta[1], sigma = theta[2];
  if (!(x > shift)) {
    if (grad) grad->setZero();
    return 0.0;
  }
  const double z = (std::log(x - shift) - mu) / sigma;
  if (grad) {
    const double phi = normal_pdf(z);
    *grad << -phi / ((x - shift) * sigma), -phi / sigma, -phi * z / sigma;
  }
  return normal_cdf(z);
}

}  // namespace detail

// Least-squares fit of the shifted log-normal to a histogram's line shape:
// bin probabilities are integrated exactly over each bin and compared with
// observed frequencies. Removed bins (and the zero bin when excluded) are
// left out and the model is renormalized over the remaining mass. Minimized
// by Levenberg-Marquardt; standard errors come from s^2 (J^T J)^-1.
inline LogNormalFit fit_lognormal(const LagHistogram& hist, const LogNormalFitOptions& options = {}) {
  std::vector<std::size_t> used, skipped;
  std::size_t nonzero = 0, n_obs = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const bool skip = hist.removed[i] || (options.exclude_zero_bin && hist.center(i) == 0.0);
    if (skip) {
      skipped.push_back(i);
      continue;
    }
    used.push_back(i);
    n_obs += hist.counts[i];
    if (hist.counts[i] > 0) ++nonzero;
  }
  if (nonzero < 6) throw InsufficientData("log-normal fit needs at least 6 nonzero bins");

  const auto nb = used.size();
  Eigen::VectorXd y(nb);
  for (std::size_t k = 0; k < nb; ++k)
    y[k] = static_cast<double>(hist.counts[used[k]]) / static_cast<double>(n_obs);

  auto evaluate = [&](const Eigen::Vector3d& theta, Eigen::VectorXd& model, Eigen::MatrixXd* jac) {
    Eigen::Vector3d g_lo, g_hi, g_skip = Eigen::Vector3d::Zero();
    double skipped_mass = 0.0;
    for (auto i : skipped) {
      const double hi = detail::lognormal_cdf(hist.upper(i), theta, &g_hi);
      const double lo = detail::lognormal_cdf(hist.lower(i), theta, &g_lo);
      skipped_mass += hi - lo;
      g_skip += g_hi - g_lo;
    }
    const double norm = 1.0 - skipped_mass;
    model.resize(nb);
    if (jac) jac->resize(nb, 3);
    for (std::size_t k = 0; k < nb; ++k) {
      const auto i = used[k];
      const double p = detail::lognormal_cdf(hist.upper(i), theta, &g_hi) -
                       detail::lognormal_cdf(hist.lower(i), theta, &g_lo);
      model[k] = p / norm;
      if (jac) jac->row(k) = ((g_hi - g_lo) / norm + p * g_skip / (norm * norm)).transpose();
    }
    return norm > 0.0;
  };

  // Initial guess: shift below the smallest occupied bin, log-moments above it.
  std::size_t first_nonzero = used.front();
  std::size_t last_nonzero = used.front();
  for (auto i : used) {
    if (hist.counts[i] == 0) continue;
    if (hist.counts[first_nonzero] == 0 || i < first_nonzero) first_nonzero = i;
    last_nonzero = i;
  }
  const double upper_support = hist.upper(last_nonzero);
  Eigen::Vector3d theta;
  theta[0] = hist.lower(first_nonzero) - 1.0;
  double s1 = 0.0, s2 = 0.0;
  for (auto i : used) {
    const double c = static_cast<double>(hist.counts[i]);
    const double l = std::log(hist.center(i) - theta[0]);
    s1 += c * l;
    s2 += c * l * l;
  }
  theta[1] = s1 / static_cast<double>(n_obs);
  theta[2] = std::sqrt(std::max(1e-4, s2 / static_cast<double>(n_obs) - theta[1] * theta[1]));

  Eigen::VectorXd model;
  Eigen::MatrixXd jac;
  evaluate(theta, model, &jac);
  double ssr = (y - model).squaredNorm();
  double lambda = 1e-3;
  std::size_t iter = 0;
  bool converged = false;

  while (iter < options.max_iterations) {
    ++iter;
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * (y - model);
    Eigen::Matrix3d damped = jtj;
    for (int d = 0; d < 3; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
    const Eigen::Vector3d step = damped.ldlt().solve(jtr);
    const Eigen::Vector3d trial = theta + step;

    Eigen::VectorXd trial_model;
    const bool feasible = step.allFinite() && trial[2] > 0.0 && trial[0] < upper_support &&
                          evaluate(trial, trial_model, nullptr);
    const double trial_ssr = feasible ? (y - trial_model).squaredNorm() : std::numeric_limits<double>::infinity();
    if (trial_ssr <= ssr) {
      const double change = ssr > 0.0 ? (ssr - trial_ssr) / ssr : 0.0;
      theta = trial;
      ssr = trial_ssr;
      evaluate(theta, model, &jac);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (change < options.tolerance) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No descent direction left at machine precision.
        converged = true;
        break;
      }
    }
  }
  if (!converged) throw FitDiverged("log-normal fit did not converge in " + std::to_string(iter) + " iterations");

  LogNormalFit fit;
  fit.shift = theta[0];
  fit.mu = theta[1];
  fit.sigma = theta[2];
  fit.ssr = ssr;
  fit.bins_used = nb;
  fit.iterations = iter;
  const double dof = static_cast<double>(nb) - 3.0;
  if (dof > 0.0) {
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    fit.covariance = (ssr / dof) * jtj.inverse();
    fit.shift_error = std::sqrt(std::max(0.0, fit.covariance(0, 0)));
    fit.mu_error = std::sqrt(std::max(0.0, fit.covariance(1, 1)));
    fit.sigma_error = std::sqrt(std::max(0.0, fit.covariance(2, 2)));
  }
  return fit;
}

}  // namespace coinv
