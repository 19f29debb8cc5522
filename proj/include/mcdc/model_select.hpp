#pragma once

#include <vector>

#include "mcdc/em.hpp"

namespace mcdc {

/// Free parameters of a g-component model in d dimensions: g - 1 mixing
/// weights, g transformation probabilities, g*d mean coordinates and
/// g*d*(d+1)/2 covariance entries.
int param_count(int g, int d);

/// Bayesian information criterion on the larger-is-better convention:
/// 2*loglik - p*log(n).
double bic(const MixtureFit& fit, std::size_t n, std::size_t d);

/// One row of the model-selection table.
struct BicEntry {
  int g = 0;
  double bic = 0.0;
  double loglik = 0.0;
  bool converged = false;
  /// True when this g was skipped: infeasible for the dataset size or every
  /// restart collapsed.  bic/loglik are meaningless then.
  bool degenerate = false;
};

struct ModelSelection {
  int chosen_g = 0;
  MixtureFit fit;
  std::vector<BicEntry> table;  ///< one entry per attempted g, ascending
};

/// Fits g = 1..g_max and returns the fit with the best BIC; ties prefer the
/// smaller g.  Throws NumericError if no g produces a usable fit.
ModelSelection select_model(const Dataset& data, const Transformation& transform,
                            int g_max, const EmConfig& config);

}  // namespace mcdc
