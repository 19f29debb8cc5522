#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcdc/linalg.hpp"

namespace mcdc {

/// One measured point: a stable identifier plus its coordinates.
struct Observation {
  std::string id;
  Vec y;
};

/// A fixed-dimension collection of observations, stored row-major.  Ids are
/// unique and order is preserved; downstream reports refer to points by id.
class Dataset {
 public:
  Dataset(std::vector<std::string> ids, std::vector<double> values, std::size_t dim);
  static Dataset from_observations(const std::vector<Observation>& obs);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  double value(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }
  void set_row(std::size_t i, std::span<const double> v);

  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& values() const { return values_; }

  /// The j-th coordinate of every observation, in order.
  Vec column(std::size_t j) const;

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;  // size() * dim(), row-major
  std::size_t dim_ = 0;
};

}  // namespace mcdc
