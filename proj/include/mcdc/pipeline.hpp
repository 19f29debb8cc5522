#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcdc/correction.hpp"
#include "mcdc/expression.hpp"

namespace mcdc {

struct PipelineConfig {
  int g_max = 9;
  EmConfig em;
  int threads = 1;
};

/// Correction outcome for one gene pair.
struct PairReport {
  std::string pair_id;
  std::string gene_a, gene_b;
  bool failed = false;
  std::string error;  ///< reason when failed
  CorrectionReport report;
};

struct PipelineResult {
  ExpressionMatrix corrected;
  std::vector<PairReport> reports;
};

/// Fits the swap-corruption model to each mapped pair of gene columns and
/// writes the corrected values back.  Pairs whose fit fails are reported and
/// left untouched.  Deterministic in config.em.seed regardless of threads.
PipelineResult correct_all_pairs(const ExpressionMatrix& matrix,
                                 const std::vector<GenePair>& pairs,
                                 const PipelineConfig& config);

/// gene -> corrected expression estimate, from each pair's dominant cluster.
std::map<std::string, double> expression_estimates(
    const std::vector<GenePair>& pairs, const std::vector<PairReport>& reports);

/// gene -> column mean over all experiments (the uncorrected estimate).
std::map<std::string, double> column_mean_estimates(
    const ExpressionMatrix& matrix, const std::vector<GenePair>& pairs);

struct RegressionMse {
  double mse = 0.0;  ///< mean squared residual of baseline ~ estimate
  double slope = 0.0, intercept = 0.0;
  std::size_t n_genes = 0;
};

/// Ordinary least squares of the reference value on the estimate across the
/// genes present in both maps (at least 3 required).
RegressionMse baseline_mse(const std::map<std::string, double>& estimates,
                           const std::map<std::string, double>& baseline);

/// The per-pair reports as a JSON array (one object per pair).
std::string reports_json(const std::vector<PairReport>& reports);

}  // namespace mcdc
