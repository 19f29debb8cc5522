#include "mcdc/dataset.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "mcdc/error.hpp"

namespace mcdc {

Dataset::Dataset(std::vector<std::string> ids, std::vector<double> values,
                 std::size_t dim)
    : ids_(std::move(ids)), values_(std::move(values)), dim_(dim) {
  if (dim_ == 0) throw ValidationError("Dataset: dimension must be positive");
  if (ids_.empty()) throw ValidationError("Dataset: no observations");
  if (values_.size() != ids_.size() * dim_)
    throw ValidationError(cat("Dataset: expected ", ids_.size() * dim_,
                              " values for ", ids_.size(), " observations of dimension ",
                              dim_, ", got ", values_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw ValidationError(cat("Dataset: non-finite value for observation '",
                                ids_[i / dim_], "'"));
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_)
    if (!seen.insert(id).second)
      throw ValidationError(cat("Dataset: duplicate observation id '", id, "'"));
}

Dataset Dataset::from_observations(const std::vector<Observation>& obs) {
  if (obs.empty()) throw ValidationError("Dataset: no observations");
  const std::size_t dim = obs.front().y.size();
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(obs.size());
  values.reserve(obs.size() * dim);
  for (const auto& o : obs) {
    if (o.y.size() != dim)
      throw ValidationError(cat("Dataset: observation '", o.id, "' has dimension ",
                                o.y.size(), ", expected ", dim));
    ids.push_back(o.id);
    values.insert(values.end(), o.y.begin(), o.y.end());
  }
  return Dataset(std::move(ids), std::move(values), dim);
}

void Dataset::set_row(std::size_t i, std::span<const double> v) {
  if (v.size() != dim_) throw ValidationError("Dataset::set_row: dimension mismatch");
  for (std::size_t j = 0; j < dim_; ++j) values_[i * dim_ + j] = v[j];
}

Vec Dataset::column(std::size_t j) const {
  if (j >= dim_) throw ValidationError("Dataset::column: index out of range");
  Vec out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = values_[i * dim_ + j];
  return out;
}

}  // namespace mcdc
