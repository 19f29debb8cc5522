#pragma once

#include <span>
#include <vector>

#include "mcdc/dataset.hpp"
#include "mcdc/linalg.hpp"
#include "mcdc/transform.hpp"

namespace mcdc {

/// Parameters of one mixture component.
///
///   tau    mixing weight (component membership probability)
///   pi     probability that a member of this component was observed
///          untransformed
///   mu     component mean (length d)
///   sigma  component covariance, symmetric positive definite (d x d)
struct ComponentParams {
  Vec mu;
  Matrix sigma;
  double tau = 1.0;
  double pi = 1.0;
};

/// Log density of the multivariate normal with the component's mu / sigma at
/// the point y.  Throws NumericError if sigma is not positive definite.
double gaussian_log_density(std::span<const double> y, const ComponentParams& p);

/// Per-observation posterior quantities from the E-step.
///
/// The model has two latent labels per observation: its component k and
/// whether it was transformed.  This stores the joint posterior
///   w1(i,k) = P(component k, untransformed | y_i)
///   w0(i,k) = P(component k, transformed   | y_i)
/// from which the marginals follow:
///   z(i,k)  = w1 + w0      component responsibility
///   xi(i)   = sum_k w1     probability observation i is untransformed
///
/// Storage is term-major: 2g contiguous length-n arrays, terms (2k, 2k+1)
/// holding (w1, w0) of component k.  The EM engine and its SIMD kernels
/// write these arrays directly.
class Responsibilities {
 public:
  Responsibilities() = default;
  Responsibilities(std::size_t n, std::size_t g)
      : n_(n), g_(g), data_(2 * g * n, 0.0) {}

  std::size_t n() const { return n_; }
  std::size_t g() const { return g_; }

  double w1(std::size_t i, std::size_t k) const { return data_[2 * k * n_ + i]; }
  double w0(std::size_t i, std::size_t k) const { return data_[(2 * k + 1) * n_ + i]; }
  double z(std::size_t i, std::size_t k) const { return w1(i, k) + w0(i, k); }
  double xi(std::size_t i) const {
    double s = 0.0;
    for (std::size_t k = 0; k < g_; ++k) s += w1(i, k);
    return s;
  }

  std::span<double> term(std::size_t t) { return {data_.data() + t * n_, n_}; }
  std::span<const double> term(std::size_t t) const { return {data_.data() + t * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::size_t g_ = 0;
  std::vector<double> data_;
};

/// Log likelihood of the observed data under the corrupted-mixture model:
/// each observation is, with probability pi_k, a draw from component k seen
/// as-is, and with probability 1 - pi_k the same draw seen through the
/// transformation.  Computed with log-sum-exp for stability.
///
/// Preconditions: components non-empty, mixing weights sum to 1 (1e-8),
/// each pi in [0, 1].  Throws NumericError if the mixture density underflows
/// to zero at some observation.
double observed_log_likelihood(const Dataset& data,
                               const std::vector<ComponentParams>& components,
                               const Transformation& transform);

/// Validates the shared preconditions above; throws ValidationError.
void check_model(const std::vector<ComponentParams>& components, std::size_t dim);

}  // namespace mcdc
