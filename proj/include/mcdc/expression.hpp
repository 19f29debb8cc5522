#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace mcdc {

/// An experiments x genes table.  The first CSV column is experiment_id; an
/// optional plate_id column and an optional perturbation / knockdown_gene
/// column may follow; every remaining column is a gene.  Missing values are
/// not allowed on load but standardization may introduce NaN cells.
struct ExpressionMatrix {
  std::vector<std::string> experiments;
  std::vector<std::string> plates;         ///< empty when no plate_id column
  std::vector<std::string> perturbations;  ///< empty when no such column
  std::string perturbation_label;          ///< header used for that column
  std::vector<std::string> genes;
  std::vector<double> values;  ///< n_rows x genes.size(), row-major
  std::unordered_map<std::string, std::size_t> gene_index;

  std::size_t n_rows() const { return experiments.size(); }
  bool has_plates() const { return !plates.empty(); }
  bool has_perturbations() const { return !perturbations.empty(); }
  double value(std::size_t row, std::size_t gene) const {
    return values[row * genes.size() + gene];
  }
  double& value(std::size_t row, std::size_t gene) {
    return values[row * genes.size() + gene];
  }
};

ExpressionMatrix load_expression_matrix(const std::string& path);
void save_expression_matrix(const ExpressionMatrix& matrix, const std::string& path);

/// One corrupted gene pair: the two columns whose values may have been
/// swapped on some rows.
struct GenePair {
  std::string pair_id, gene_a, gene_b;
};

/// Loads the pair map (columns pair_id, gene_a, gene_b) and checks that pair
/// ids are unique and no gene appears twice.
std::vector<GenePair> load_pair_map(const std::string& path);

/// Loads reference expression values (columns gene_id, value).
std::map<std::string, double> load_baseline(const std::string& path);

}  // namespace mcdc
