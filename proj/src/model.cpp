#include "mcdc/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcdc/error.hpp"

namespace mcdc {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double gaussian_log_density(std::span<const double> y, const ComponentParams& p) {
  const std::size_t d = p.mu.size();
  if (y.size() != d)
    throw ValidationError(cat("gaussian_log_density: point has dimension ", y.size(),
                              ", component has dimension ", d));
  Matrix lower;
  if (!cholesky(p.sigma, lower))
    throw NumericError("gaussian_log_density: covariance is not positive definite");
  Vec diff(d);
  for (std::size_t j = 0; j < d; ++j) diff[j] = y[j] - p.mu[j];
  const Vec u = chol_forward_solve(lower, diff);
  double q = 0.0;
  for (double v : u) q += v * v;
  return -0.5 * (static_cast<double>(d) * kLog2Pi + chol_log_det(lower) + q);
}

void check_model(const std::vector<ComponentParams>& components, std::size_t dim) {
  if (components.empty()) throw ValidationError("model: no components");
  double tau_sum = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    if (c.mu.size() != dim)
      throw ValidationError(cat("model: component ", k, " mean has dimension ",
                                c.mu.size(), ", expected ", dim));
    if (c.sigma.rows() != dim || c.sigma.cols() != dim)
      throw ValidationError(cat("model: component ", k, " covariance is ",
                                c.sigma.rows(), "x", c.sigma.cols(), ", expected ",
                                dim, "x", dim));
    if (!is_symmetric(c.sigma, 1e-9))
      throw ValidationError(cat("model: component ", k, " covariance is not symmetric"));
    if (!(c.tau >= 0.0 && c.tau <= 1.0))
      throw ValidationError(cat("model: component ", k, " mixing weight ", c.tau,
                                " outside [0, 1]"));
    if (!(c.pi >= 0.0 && c.pi <= 1.0))
      throw ValidationError(cat("model: component ", k, " untransformed probability ",
                                c.pi, " outside [0, 1]"));
    tau_sum += c.tau;
  }
  if (std::abs(tau_sum - 1.0) > 1e-8)
    throw ValidationError(cat("model: mixing weights sum to ", tau_sum, ", expected 1"));
}

double observed_log_likelihood(const Dataset& data,
                               const std::vector<ComponentParams>& components,
                               const Transformation& transform) {
  check_model(components, data.dim());
  if (transform.dim() != data.dim())
    throw ValidationError("observed_log_likelihood: transform dimension mismatch");

  const std::size_t g = components.size();
  std::vector<double> log_tau_pi1(g), log_tau_pi0(g);
  for (std::size_t k = 0; k < g; ++k) {
    log_tau_pi1[k] = std::log(components[k].tau) + std::log(components[k].pi);
    log_tau_pi0[k] = std::log(components[k].tau) + std::log1p(-components[k].pi);
  }

  double total = 0.0;
  std::vector<double> terms(2 * g);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto y = data.row(i);
    const Vec back = transform.apply_inverse(y);
    for (std::size_t k = 0; k < g; ++k) {
      terms[2 * k] = log_tau_pi1[k] + gaussian_log_density(y, components[k]);
      terms[2 * k + 1] = log_tau_pi0[k] + gaussian_log_density(back, components[k]);
    }
    const double hi = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(hi))
      throw NumericError(cat("observed_log_likelihood: mixture density vanished at "
                             "observation '", data.id(i), "' (index ", i, ")"));
    double s = 0.0;
    for (double t : terms) s += std::exp(t - hi);
    total += hi + std::log(s);
  }
  return total;
}

}  // namespace mcdc
