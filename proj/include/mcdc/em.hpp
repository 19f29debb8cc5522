#pragma once

#include <cstdint>
#include <vector>

#include "mcdc/dataset.hpp"
#include "mcdc/model.hpp"
#include "mcdc/transform.hpp"

namespace mcdc {

/// Settings for the EM fit.
struct EmConfig {
  /// Iteration cap per restart.
  int max_iter = 1000;
  /// Convergence: |loglik - prev| <= rel_tol * (1 + |loglik|).
  double rel_tol = 1e-8;
  /// Number of random restarts; the best final log likelihood wins.
  int restarts = 10;
  /// Seed for the restart initializations; fits are deterministic in it.
  std::uint64_t seed = 0;
  /// Covariance guard: when the smallest eigenvalue of an M-step covariance
  /// falls below ridge * trace/d, ridge * trace/d is added to its diagonal.
  double ridge = 1e-6;
};

/// Result of one EM fit (the best restart).
struct MixtureFit {
  std::vector<ComponentParams> components;
  Responsibilities resp;  ///< E-step quantities at the returned parameters
  double loglik = 0.0;    ///< observed log likelihood at the returned parameters
  int n_iter = 0;
  bool converged = false;
  /// Observed log likelihood at the start of each iteration; non-decreasing
  /// up to floating-point noise.
  std::vector<double> loglik_trace;
};

/// Posterior component / transformation-state weights at fixed parameters.
/// Throws NumericError if the mixture density vanishes at some observation
/// or a covariance is not positive definite.
Responsibilities e_step(const Dataset& data,
                        const std::vector<ComponentParams>& components,
                        const Transformation& transform);

/// M-step output.  A component becomes degenerate when its responsibility
/// mass drops below d + 1 or its covariance cannot be repaired by the ridge
/// guard; the EM driver then abandons the restart.
struct MStepResult {
  std::vector<ComponentParams> components;
  int degenerate_component = -1;
  bool ok() const { return degenerate_component < 0; }
};

MStepResult m_step(const Dataset& data, const Responsibilities& resp,
                   const Transformation& transform, const EmConfig& config);

/// Random starting parameters: provisional labels un-transform a random 25%
/// of the points, k-means centers seed the means, the pooled within-cluster
/// covariance seeds every sigma.
std::vector<ComponentParams> initialize(const Dataset& data, int g,
                                        const Transformation& transform,
                                        std::uint64_t seed);

/// Fits a g-component model with random restarts.  The returned components,
/// responsibilities and log likelihood are mutually consistent.  Requires
/// 1 <= g <= n / (d + 1); throws NumericError if every restart degenerates.
MixtureFit run_em(const Dataset& data, int g, const Transformation& transform,
                  const EmConfig& config);

}  // namespace mcdc
