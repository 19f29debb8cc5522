#include "mcdc/model_select.hpp"

#include <cmath>
#include <limits>

#include "mcdc/error.hpp"

namespace mcdc {

int param_count(int g, int d) {
  if (g < 1) throw ValidationError("param_count: g must be at least 1");
  if (d < 1) throw ValidationError("param_count: d must be at least 1");
  return (g - 1) + g + g * d + g * d * (d + 1) / 2;
}

double bic(const MixtureFit& fit, std::size_t n, std::size_t d) {
  if (fit.components.empty()) throw ValidationError("bic: fit has no components");
  if (n == 0) throw ValidationError("bic: n must be positive");
  const int g = static_cast<int>(fit.components.size());
  return 2.0 * fit.loglik -
         static_cast<double>(param_count(g, static_cast<int>(d))) *
             std::log(static_cast<double>(n));
}

ModelSelection select_model(const Dataset& data, const Transformation& transform,
                            int g_max, const EmConfig& config) {
  if (g_max < 1) throw ValidationError("select_model: g_max must be at least 1");
  ModelSelection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (int g = 1; g <= g_max; ++g) {
    BicEntry entry;
    entry.g = g;
    const bool feasible =
        static_cast<std::size_t>(g) * (data.dim() + 1) <= data.size();
    if (!feasible) {
      entry.degenerate = true;
      sel.table.push_back(entry);
      continue;
    }
    MixtureFit fit;
    try {
      fit = run_em(data, g, transform, config);
    } catch (const NumericError&) {
      entry.degenerate = true;
      sel.table.push_back(entry);
      continue;
    }
    entry.loglik = fit.loglik;
    entry.bic = bic(fit, data.size(), data.dim());
    entry.converged = fit.converged;
    sel.table.push_back(entry);
    if (entry.bic > best) {  // strict: ties keep the smaller g
      best = entry.bic;
      sel.chosen_g = g;
      sel.fit = std::move(fit);
    }
  }
  if (sel.chosen_g == 0)
    throw NumericError(cat("select_model: no component count up to ", g_max,
                           " produced a fit"));
  return sel;
}

}  // namespace mcdc
