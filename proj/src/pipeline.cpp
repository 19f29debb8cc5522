#include "mcdc/pipeline.hpp"

#include <cmath>
#include <unordered_map>

#include "json.hpp"

#include "mcdc/error.hpp"
#include "mcdc/parallel.hpp"
#include "mcdc/rng.hpp"

namespace mcdc {

namespace {

void check_pairs_against_matrix(const ExpressionMatrix& matrix,
                                const std::vector<GenePair>& pairs) {
  for (const auto& p : pairs)
    for (const auto& gene : {p.gene_a, p.gene_b})
      if (!matrix.gene_index.count(gene))
        throw ValidationError(cat("pair '", p.pair_id, "': gene '", gene,
                                  "' is not a column of the expression matrix"));
}

}  // namespace

PipelineResult correct_all_pairs(const ExpressionMatrix& matrix,
                                 const std::vector<GenePair>& pairs,
                                 const PipelineConfig& config) {
  if (config.g_max < 1) throw ValidationError("correct_all_pairs: g_max must be positive");
  check_pairs_against_matrix(matrix, pairs);
  const std::size_t n = matrix.n_rows();

  PipelineResult result;
  result.corrected = matrix;
  result.reports.resize(pairs.size());

  const Transformation swap = Transformation::swap2();
  parallel_for(pairs.size(), config.threads, [&](std::size_t idx) {
    const GenePair& pair = pairs[idx];
    PairReport& report = result.reports[idx];
    report.pair_id = pair.pair_id;
    report.gene_a = pair.gene_a;
    report.gene_b = pair.gene_b;

    const std::size_t ca = matrix.gene_index.at(pair.gene_a);
    const std::size_t cb = matrix.gene_index.at(pair.gene_b);
    std::vector<double> values(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
      values[2 * i] = matrix.value(i, ca);
      values[2 * i + 1] = matrix.value(i, cb);
    }
    const Dataset data(matrix.experiments, std::move(values), 2);

    EmConfig em = config.em;
    em.seed = Rng(config.em.seed).split(0x70616972ull + idx).seed();
    try {
      const ModelSelection sel = select_model(data, swap, config.g_max, em);
      auto [corrected, rep] = correct_dataset(data, sel, swap);
      report.report = std::move(rep);
      for (std::size_t i = 0; i < n; ++i) {
        result.corrected.value(i, ca) = corrected.value(i, 0);
        result.corrected.value(i, cb) = corrected.value(i, 1);
      }
    } catch (const NumericError& e) {
      report.failed = true;
      report.error = e.what();
    }
  });
  return result;
}

std::map<std::string, double> expression_estimates(
    const std::vector<GenePair>& pairs, const std::vector<PairReport>& reports) {
  if (pairs.size() != reports.size())
    throw ValidationError("expression_estimates: pairs and reports differ in length");
  std::map<std::string, double> estimates;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (reports[i].failed) continue;
    estimates[pairs[i].gene_a] = reports[i].report.expression_estimate[0];
    estimates[pairs[i].gene_b] = reports[i].report.expression_estimate[1];
  }
  return estimates;
}

std::map<std::string, double> column_mean_estimates(
    const ExpressionMatrix& matrix, const std::vector<GenePair>& pairs) {
  check_pairs_against_matrix(matrix, pairs);
  std::map<std::string, double> means;
  for (const auto& p : pairs) {
    for (const auto& gene : {p.gene_a, p.gene_b}) {
      const std::size_t c = matrix.gene_index.at(gene);
      double s = 0.0;
      for (std::size_t i = 0; i < matrix.n_rows(); ++i) s += matrix.value(i, c);
      means[gene] = s / static_cast<double>(matrix.n_rows());
    }
  }
  return means;
}

RegressionMse baseline_mse(const std::map<std::string, double>& estimates,
                           const std::map<std::string, double>& baseline) {
  std::vector<double> x, y;
  for (const auto& [gene, est] : estimates) {
    const auto it = baseline.find(gene);
    if (it == baseline.end()) continue;
    x.push_back(est);
    y.push_back(it->second);
  }
  const std::size_t n = x.size();
  if (n < 3)
    throw ValidationError(cat("baseline_mse: only ", n,
                              " genes shared between estimates and baseline, "
                              "need at least 3"));
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  RegressionMse out;
  out.n_genes = n;
  out.slope = sxx > 0 ? sxy / sxx : 0.0;
  out.intercept = my - out.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (out.intercept + out.slope * x[i]);
    ssr += r * r;
  }
  out.mse = ssr / static_cast<double>(n);
  return out;
}

std::string reports_json(const std::vector<PairReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    if (r.failed) {
      arr.push_back({{"pair_id", r.pair_id}, {"failed", true}, {"error", r.error}});
      continue;
    }
    nlohmann::json table = nlohmann::json::array();
    for (const auto& e : r.report.bic_table) {
      nlohmann::json row{{"g", e.g}, {"degenerate", e.degenerate}};
      if (!e.degenerate) {
        row["bic"] = e.bic;
        row["loglik"] = e.loglik;
        row["converged"] = e.converged;
      }
      table.push_back(std::move(row));
    }
    arr.push_back({{"pair_id", r.pair_id},
                   {"chosen_g", r.report.chosen_g},
                   {"bic_table", std::move(table)},
                   {"pi", r.report.pi},
                   {"cluster_sizes", r.report.cluster_sizes},
                   {"expression_estimate", r.report.expression_estimate},
                   {"flipped_ids", r.report.flipped_ids}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace mcdc
