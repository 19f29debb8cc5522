#include "mcdc/correction.hpp"

#include <algorithm>

#include "mcdc/error.hpp"

namespace mcdc {

std::vector<double> cluster_masses(const MixtureFit& fit) {
  const std::size_t g = fit.resp.g();
  std::vector<double> mass(g, 0.0);
  for (std::size_t k = 0; k < g; ++k)
    for (std::size_t i = 0; i < fit.resp.n(); ++i) mass[k] += fit.resp.z(i, k);
  return mass;
}

int largest_cluster_index(const MixtureFit& fit) {
  const auto mass = cluster_masses(fit);
  if (mass.empty()) throw ValidationError("largest_cluster_index: empty fit");
  std::size_t arg = 0;
  for (std::size_t k = 1; k < mass.size(); ++k)
    if (mass[k] > mass[arg]) arg = k;  // strict: ties keep the smaller index
  return static_cast<int>(arg);
}

Vec estimate_expression(const MixtureFit& fit) {
  return fit.components[static_cast<std::size_t>(largest_cluster_index(fit))].mu;
}

std::pair<Dataset, CorrectionReport> correct_dataset(const Dataset& data,
                                                     const ModelSelection& sel,
                                                     const Transformation& transform) {
  const MixtureFit& fit = sel.fit;
  if (fit.resp.n() != data.size())
    throw ValidationError("correct_dataset: fit does not match the dataset");
  if (transform.dim() != data.dim())
    throw ValidationError("correct_dataset: transform dimension mismatch");

  CorrectionReport report;
  report.chosen_g = sel.chosen_g;
  report.bic_table = sel.table;
  for (const auto& c : fit.components) report.pi.push_back(c.pi);
  report.cluster_sizes = cluster_masses(fit);
  report.largest_cluster = largest_cluster_index(fit);
  report.expression_estimate = estimate_expression(fit);

  std::vector<double> values = data.values();
  const std::size_t d = data.dim();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (fit.resp.xi(i) < 0.5) {
      const Vec back = transform.apply_inverse(data.row(i));
      std::copy(back.begin(), back.end(), values.begin() + i * d);
      report.flipped_ids.push_back(data.id(i));
    }
  }
  return {Dataset(data.ids(), std::move(values), d), std::move(report)};
}

}  // namespace mcdc
