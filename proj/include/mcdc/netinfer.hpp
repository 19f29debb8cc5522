#pragma once

#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcdc/expression.hpp"

namespace mcdc {

/// Knockdown measurements standardized against same-plate controls:
/// z = (x - control mean) / control sd.  Cells whose control sd is zero
/// become NaN and the (plate, gene) combination is recorded in `skipped`.
struct StandardizedKnockdowns {
  ExpressionMatrix z;
  std::vector<std::pair<std::string, std::string>> skipped;  ///< (plate, gene)
};

/// Standardizes every knockdown row.  The knockdown matrix needs plate_id and
/// knockdown_gene columns; the control matrix needs plate_id and every gene
/// of the knockdown matrix, with at least two control rows per referenced
/// plate.
StandardizedKnockdowns standardize_knockdowns(const ExpressionMatrix& knockdowns,
                                              const ExpressionMatrix& controls);

struct EdgeScore {
  std::string regulator, target;
  double posterior = 0.0;
  bool degenerate = false;  ///< regression was impossible; posterior = prior
};

/// Posterior probability that the target responds to the regulator, from a
/// BIC-approximated Bayes factor of the regression target ~ regulator over
/// the regulator's knockdown experiments.
EdgeScore edge_posterior(const std::string& regulator, const std::string& target,
                         std::span<const double> x, std::span<const double> y,
                         double prior);

/// Scores every (regulator, target) pair where the regulator was knocked
/// down in at least 3 experiments with usable values.  Sorted by descending
/// posterior, ties by (regulator, target).
std::vector<EdgeScore> infer_edges(const StandardizedKnockdowns& z, double prior,
                                   int threads = 1);

using EdgeSet = std::set<std::pair<std::string, std::string>>;

/// P(X >= k) for X ~ Binomial(n, p).
double binomial_tail_pvalue(long k, long n, double p);

struct EdgeEvaluation {
  double cutoff = 0.0;
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double p_value = 1.0;  ///< chance of >= tp hits among tp+fp random calls
};

/// The p-value computed from a 2x2 confusion table alone.
double evaluation_pvalue(long tp, long fp, long fn, long tn);

/// Confusion table of the calls (posterior >= cutoff) against the reference
/// edges, over the scored universe only.
EdgeEvaluation evaluate_edges(const std::vector<EdgeScore>& scores,
                              const EdgeSet& truth, double cutoff);

struct PrPoint {
  double posterior = 0.0;  ///< score of the last edge included
  double recall = 0.0;
  double precision = 0.0;
};

/// Precision and recall at every prefix of the ranked edge list.  Recall is
/// against the reference edges that appear in the scored universe.
std::vector<PrPoint> precision_recall(const std::vector<EdgeScore>& scores,
                                      const EdgeSet& truth);

/// Edge list CSV(columns regulator,target,posterior), sorted like infer_edges.
void save_edges(const std::vector<EdgeScore>& scores, const std::string& path);
std::vector<EdgeScore> load_edges(const std::string& path);
EdgeSet load_truth(const std::string& path);

}  // namespace mcdc
