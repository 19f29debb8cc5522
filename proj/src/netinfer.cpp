#include "mcdc/netinfer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "mcdc/csv.hpp"
#include "mcdc/error.hpp"
#include "mcdc/parallel.hpp"

namespace mcdc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_prior(double prior) {
  if (!(prior > 0.0 && prior < 1.0))
    throw ValidationError(cat("prior must be strictly between 0 and 1, got ", prior));
}

bool edge_order(const EdgeScore& a, const EdgeScore& b) {
  if (a.posterior != b.posterior) return a.posterior > b.posterior;
  if (a.regulator != b.regulator) return a.regulator < b.regulator;
  return a.target < b.target;
}

}  // namespace

StandardizedKnockdowns standardize_knockdowns(const ExpressionMatrix& knockdowns,
                                              const ExpressionMatrix& controls) {
  if (!knockdowns.has_plates() || !knockdowns.has_perturbations())
    throw ValidationError(
        "standardize: knockdown matrix needs plate_id and knockdown_gene columns");
  if (!controls.has_plates())
    throw ValidationError("standardize: control matrix needs a plate_id column");
  for (const auto& gene : knockdowns.genes)
    if (!controls.gene_index.count(gene))
      throw ValidationError(cat("standardize: gene '", gene,
                                "' missing from the control matrix"));

  std::map<std::string, std::vector<std::size_t>> control_rows;
  for (std::size_t i = 0; i < controls.n_rows(); ++i)
    control_rows[controls.plates[i]].push_back(i);

  // Per plate, per knockdown-matrix gene: control mean and sd (n-1 divisor).
  struct PlateStats {
    std::vector<double> mean, sd;
  };
  std::map<std::string, PlateStats> stats;
  for (const auto& plate : knockdowns.plates) {
    if (stats.count(plate)) continue;
    const auto it = control_rows.find(plate);
    if (it == control_rows.end() || it->second.size() < 2)
      throw ValidationError(cat("standardize: plate '", plate,
                                "' has fewer than 2 control rows"));
    const auto& rows = it->second;
    PlateStats ps;
    ps.mean.resize(knockdowns.genes.size());
    ps.sd.resize(knockdowns.genes.size());
    for (std::size_t g = 0; g < knockdowns.genes.size(); ++g) {
      const std::size_t cg = controls.gene_index.at(knockdowns.genes[g]);
      double m = 0.0;
      for (const std::size_t r : rows) m += controls.value(r, cg);
      m /= static_cast<double>(rows.size());
      double ss = 0.0;
      for (const std::size_t r : rows) {
        const double d = controls.value(r, cg) - m;
        ss += d * d;
      }
      ps.mean[g] = m;
      ps.sd[g] = std::sqrt(ss / static_cast<double>(rows.size() - 1));
    }
    stats.emplace(plate, std::move(ps));
  }

  StandardizedKnockdowns out;
  out.z = knockdowns;
  std::set<std::pair<std::string, std::string>> skipped;
  for (std::size_t i = 0; i < knockdowns.n_rows(); ++i) {
    const PlateStats& ps = stats.at(knockdowns.plates[i]);
    for (std::size_t g = 0; g < knockdowns.genes.size(); ++g) {
      if (ps.sd[g] > 0.0) {
        out.z.value(i, g) = (knockdowns.value(i, g) - ps.mean[g]) / ps.sd[g];
      } else {
        out.z.value(i, g) = kNaN;
        skipped.emplace(knockdowns.plates[i], knockdowns.genes[g]);
      }
    }
  }
  out.skipped.assign(skipped.begin(), skipped.end());
  return out;
}

EdgeScore edge_posterior(const std::string& regulator, const std::string& target,
                         std::span<const double> x, std::span<const double> y,
                         double prior) {
  check_prior(prior);
  if (x.size() != y.size())
    throw ValidationError("edge_posterior: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw ValidationError("edge_posterior: need at least 3 experiments");

  EdgeScore edge{regulator, target, prior, false};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    edge.degenerate = true;  // flat knockdown depth or flat response
    return edge;
  }

  const double nd = static_cast<double>(n);
  const double ssr0 = syy;
  const double ssr1 = std::max(syy - sxy * sxy / sxx, 0.0);
  const double log_prior_odds = std::log(prior) - std::log1p(-prior);
  double t;
  if (ssr1 == 0.0) {
    t = std::numeric_limits<double>::infinity();  // exact fit: BF diverges
  } else {
    // BIC difference of the two regressions, halved = log Bayes factor.
    const double bic0 = nd * std::log(ssr0 / nd) + std::log(nd);
    const double bic1 = nd * std::log(ssr1 / nd) + 2.0 * std::log(nd);
    t = log_prior_odds + 0.5 * (bic0 - bic1);
  }
  edge.posterior = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t))
                            : std::exp(t) / (1.0 + std::exp(t));
  return edge;
}

std::vector<EdgeScore> infer_edges(const StandardizedKnockdowns& z, double prior,
                                   int threads) {
  check_prior(prior);
  const ExpressionMatrix& m = z.z;
  if (!m.has_perturbations())
    throw ValidationError("infer_edges: matrix lacks the knockdown_gene column");

  // Regulators: knocked-down genes that are measured, with their experiments.
  std::map<std::string, std::vector<std::size_t>> kd_rows;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    const std::string& gene = m.perturbations[i];
    if (m.gene_index.count(gene)) kd_rows[gene].push_back(i);
  }
  std::vector<std::pair<std::string, std::vector<std::size_t>>> regulators(
      kd_rows.begin(), kd_rows.end());

  std::vector<std::vector<EdgeScore>> per_regulator(regulators.size());
  parallel_for(regulators.size(), threads, [&](std::size_t ri) {
    const auto& [regulator, rows] = regulators[ri];
    if (rows.size() < 3) return;
    const std::size_t rc = m.gene_index.at(regulator);
    std::vector<double> x, y;
    for (std::size_t t = 0; t < m.genes.size(); ++t) {
      if (t == rc) continue;
      x.clear();
      y.clear();
      for (const std::size_t row : rows) {
        const double xv = m.value(row, rc), yv = m.value(row, t);
        if (std::isfinite(xv) && std::isfinite(yv)) {
          x.push_back(xv);
          y.push_back(yv);
        }
      }
      if (x.size() < 3) continue;  // not usable often enough
      per_regulator[ri].push_back(edge_posterior(regulator, m.genes[t], x, y, prior));
    }
  });

  std::vector<EdgeScore> edges;
  for (auto& chunk : per_regulator)
    edges.insert(edges.end(), std::make_move_iterator(chunk.begin()),
                 std::make_move_iterator(chunk.end()));
  std::sort(edges.begin(), edges.end(), edge_order);
  return edges;
}

double binomial_tail_pvalue(long k, long n, double p) {
  if (n < 0) throw ValidationError("binomial_tail_pvalue: n must be non-negative");
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError("binomial_tail_pvalue: p must lie in [0, 1]");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;  // k >= 1 here
  if (p == 1.0) return 1.0;
  const double logp = std::log(p), log1mp = std::log1p(-p);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  double sum = 0.0;
  for (long j = k; j <= n; ++j) {
    const double lchoose = lg_n1 - std::lgamma(static_cast<double>(j) + 1.0) -
                           std::lgamma(static_cast<double>(n - j) + 1.0);
    sum += std::exp(lchoose + static_cast<double>(j) * logp +
                    static_cast<double>(n - j) * log1mp);
  }
  return std::min(sum, 1.0);
}

double evaluation_pvalue(long tp, long fp, long fn, long tn) {
  if (tp < 0 || fp < 0 || fn < 0 || tn < 0)
    throw ValidationError("evaluation_pvalue: negative count");
  const long total = tp + fp + fn + tn;
  if (total == 0) throw ValidationError("evaluation_pvalue: empty table");
  const double hit_rate = static_cast<double>(tp + fn) / static_cast<double>(total);
  return binomial_tail_pvalue(tp, tp + fp, hit_rate);
}

EdgeEvaluation evaluate_edges(const std::vector<EdgeScore>& scores,
                              const EdgeSet& truth, double cutoff) {
  if (!(cutoff >= 0.0 && cutoff <= 1.0))
    throw ValidationError(cat("evaluate_edges: cutoff ", cutoff, " outside [0, 1]"));
  if (scores.empty()) throw ValidationError("evaluate_edges: no scored edges");
  EdgeEvaluation e;
  e.cutoff = cutoff;
  for (const auto& s : scores) {
    const bool called = s.posterior >= cutoff;
    const bool real = truth.count({s.regulator, s.target}) > 0;
    if (called && real) ++e.tp;
    else if (called) ++e.fp;
    else if (real) ++e.fn;
    else ++e.tn;
  }
  e.p_value = evaluation_pvalue(e.tp, e.fp, e.fn, e.tn);
  return e;
}

std::vector<PrPoint> precision_recall(const std::vector<EdgeScore>& scores,
                                      const EdgeSet& truth) {
  if (scores.empty()) throw ValidationError("precision_recall: no scored edges");
  std::vector<EdgeScore> ranked = scores;
  std::sort(ranked.begin(), ranked.end(), edge_order);
  long in_universe = 0;
  for (const auto& s : ranked) in_universe += truth.count({s.regulator, s.target});
  if (in_universe == 0)
    throw ValidationError("precision_recall: no reference edges among scored pairs");
  std::vector<PrPoint> curve;
  curve.reserve(ranked.size());
  long tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    tp += truth.count({ranked[i].regulator, ranked[i].target});
    curve.push_back({ranked[i].posterior,
                     static_cast<double>(tp) / static_cast<double>(in_universe),
                     static_cast<double>(tp) / static_cast<double>(i + 1)});
  }
  return curve;
}

void save_edges(const std::vector<EdgeScore>& scores, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError(cat("cannot write file '", path, "'"));
  csv::write_row(out, {"regulator", "target", "posterior"});
  for (const auto& s : scores)
    csv::write_row(out, {s.regulator, s.target, csv::format_double(s.posterior)});
  if (!out) throw Error(cat("write failed for '", path, "'"));
}

std::vector<EdgeScore> load_edges(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const auto r = csv::find_column(table, "regulator");
  const auto t = csv::find_column(table, "target");
  const auto p = csv::find_column(table, "posterior");
  if (!r || !t || !p)
    throw ValidationError(
        cat(path, ": header must contain regulator, target, posterior"));
  std::vector<EdgeScore> scores;
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    scores.push_back({table.rows[i][*r], table.rows[i][*t],
                      csv::parse_number(table, i, *p), false});
  if (scores.empty()) throw ValidationError(cat(path, ": no edges"));
  return scores;
}

EdgeSet load_truth(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const auto r = csv::find_column(table, "regulator");
  const auto t = csv::find_column(table, "target");
  if (!r || !t)
    throw ValidationError(cat(path, ": header must contain regulator, target"));
  EdgeSet truth;
  for (const auto& row : table.rows) truth.emplace(row[*r], row[*t]);
  if (truth.empty()) throw ValidationError(cat(path, ": no edges"));
  return truth;
}

}  // namespace mcdc
