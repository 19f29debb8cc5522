#include "mcdc/expression.hpp"

#include <fstream>
#include <unordered_set>

#include "mcdc/csv.hpp"
#include "mcdc/error.hpp"

namespace mcdc {

ExpressionMatrix load_expression_matrix(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  if (table.header.empty() || table.header[0] != "experiment_id")
    throw ValidationError(cat(path, ": first column must be 'experiment_id'"));

  ExpressionMatrix m;
  std::size_t col = 1;
  bool with_plates = false, with_perturbations = false;
  if (col < table.header.size() && table.header[col] == "plate_id") {
    with_plates = true;
    ++col;
  }
  if (col < table.header.size() &&
      (table.header[col] == "perturbation" || table.header[col] == "knockdown_gene")) {
    with_perturbations = true;
    m.perturbation_label = table.header[col];
    ++col;
  }
  const std::size_t gene_start = col;
  if (gene_start >= table.header.size())
    throw ValidationError(cat(path, ": no gene columns found"));
  for (std::size_t c = gene_start; c < table.header.size(); ++c) {
    const std::string& gene = table.header[c];
    if (gene.empty())
      throw ValidationError(cat(path, ": empty gene name in column ", c + 1));
    if (!m.gene_index.emplace(gene, m.genes.size()).second)
      throw ValidationError(cat(path, ": duplicate gene column '", gene, "'"));
    m.genes.push_back(gene);
  }

  std::unordered_set<std::string> seen;
  m.values.reserve(table.rows.size() * m.genes.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (!seen.insert(row[0]).second)
      throw ValidationError(cat(path, " line ", table.line_numbers[r],
                                ": duplicate experiment id '", row[0], "'"));
    m.experiments.push_back(row[0]);
    if (with_plates) m.plates.push_back(row[1]);
    if (with_perturbations) m.perturbations.push_back(row[with_plates ? 2 : 1]);
    for (std::size_t c = gene_start; c < row.size(); ++c)
      m.values.push_back(csv::parse_number(table, r, c));
  }
  if (m.experiments.empty())
    throw ValidationError(cat(path, ": no data rows"));
  return m;
}

void save_expression_matrix(const ExpressionMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError(cat("cannot write file '", path, "'"));
  std::vector<std::string> cells;
  cells.push_back("experiment_id");
  if (m.has_plates()) cells.push_back("plate_id");
  if (m.has_perturbations())
    cells.push_back(m.perturbation_label.empty() ? "perturbation"
                                                 : m.perturbation_label);
  cells.insert(cells.end(), m.genes.begin(), m.genes.end());
  csv::write_row(out, cells);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    cells.clear();
    cells.push_back(m.experiments[i]);
    if (m.has_plates()) cells.push_back(m.plates[i]);
    if (m.has_perturbations()) cells.push_back(m.perturbations[i]);
    for (std::size_t j = 0; j < m.genes.size(); ++j)
      cells.push_back(csv::format_double(m.value(i, j)));
    csv::write_row(out, cells);
  }
  if (!out) throw Error(cat("write failed for '", path, "'"));
}

std::vector<GenePair> load_pair_map(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const auto id_col = csv::find_column(table, "pair_id");
  const auto a_col = csv::find_column(table, "gene_a");
  const auto b_col = csv::find_column(table, "gene_b");
  if (!id_col || !a_col || !b_col)
    throw ValidationError(cat(path, ": header must contain pair_id, gene_a, gene_b"));
  std::vector<GenePair> pairs;
  std::unordered_set<std::string> ids, genes;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    GenePair p{table.rows[r][*id_col], table.rows[r][*a_col], table.rows[r][*b_col]};
    const std::size_t line = table.line_numbers[r];
    if (p.pair_id.empty())
      throw ValidationError(cat(path, " line ", line, ": empty pair_id"));
    if (!ids.insert(p.pair_id).second)
      throw ValidationError(cat(path, " line ", line, ": duplicate pair_id '",
                                p.pair_id, "'"));
    if (p.gene_a.empty() || p.gene_b.empty() || p.gene_a == p.gene_b)
      throw ValidationError(cat(path, " line ", line,
                                ": a pair needs two distinct gene names"));
    for (const auto& g : {p.gene_a, p.gene_b})
      if (!genes.insert(g).second)
        throw ValidationError(cat(path, " line ", line, ": gene '", g,
                                  "' appears in more than one pair"));
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw ValidationError(cat(path, ": no pairs"));
  return pairs;
}

std::map<std::string, double> load_baseline(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const auto gene_col = csv::find_column(table, "gene_id");
  const auto value_col = csv::find_column(table, "value");
  if (!gene_col || !value_col)
    throw ValidationError(cat(path, ": header must contain gene_id, value"));
  std::map<std::string, double> baseline;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& gene = table.rows[r][*gene_col];
    if (!baseline.emplace(gene, csv::parse_number(table, r, *value_col)).second)
      throw ValidationError(cat(path, " line ", table.line_numbers[r],
                                ": duplicate gene '", gene, "'"));
  }
  if (baseline.empty()) throw ValidationError(cat(path, ": no rows"));
  return baseline;
}

}  // namespace mcdc
