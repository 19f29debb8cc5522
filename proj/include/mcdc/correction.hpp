#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mcdc/model_select.hpp"

namespace mcdc {

/// Everything worth reporting about the correction of one dataset.
struct CorrectionReport {
  int chosen_g = 0;
  std::vector<BicEntry> bic_table;
  std::vector<double> pi;             ///< untransformed probability per component
  std::vector<double> cluster_sizes;  ///< responsibility mass per component
  std::vector<std::string> flipped_ids;  ///< ids judged transformed (xi < 0.5)
  int largest_cluster = 0;  ///< component with the most mass (ties: smaller index)
  Vec expression_estimate;  ///< mean of the largest component
};

/// Replaces every observation whose posterior untransformed probability is
/// below 0.5 with its back-transformed value.  Ids and order are preserved.
std::pair<Dataset, CorrectionReport> correct_dataset(const Dataset& data,
                                                     const ModelSelection& sel,
                                                     const Transformation& transform);

/// Responsibility mass per component: n_k = sum_i z(i, k).
std::vector<double> cluster_masses(const MixtureFit& fit);

int largest_cluster_index(const MixtureFit& fit);

/// Expression estimate: the mean of the component with the largest mass.
Vec estimate_expression(const MixtureFit& fit);

}  // namespace mcdc
