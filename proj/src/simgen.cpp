#include "mcdc/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"

#include "mcdc/csv.hpp"
#include "mcdc/error.hpp"
#include "mcdc/parallel.hpp"

namespace mcdc {

namespace {

double mean_abs_err(const Vec& est, const Vec& truth) {
  double s = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) s += std::abs(est[j] - truth[j]);
  return s / static_cast<double>(truth.size());
}

Vec sample_mean(const Dataset& data) {
  Vec m(data.dim(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data.dim(); ++j) m[j] += data.value(i, j);
  for (double& v : m) v /= static_cast<double>(data.size());
  return m;
}

void check_spec(const SimSpec& spec) {
  if (spec.study < 1 || spec.study > 3)
    throw ValidationError(cat("simulation: unknown study ", spec.study));
  if (spec.n < 10) throw ValidationError("simulation: n must be at least 10");
  if (spec.replicates < 1)
    throw ValidationError("simulation: replicates must be positive");
  if (spec.study != 3) {
    if (spec.flip_probs.empty())
      throw ValidationError("simulation: empty corruption grid");
    for (double p : spec.flip_probs)
      if (!(p > 0.0 && p <= 0.5))
        throw ValidationError(cat("simulation: corruption probability ", p,
                                  " outside (0, 0.5]"));
  }
  if (spec.study == 2) {
    if (spec.taus.empty()) throw ValidationError("simulation: empty tau grid");
    for (double t : spec.taus)
      if (!(t > 0.5 && t < 1.0))
        throw ValidationError(cat("simulation: tau ", t, " outside (0.5, 1)"));
  }
  if (spec.study == 3) {
    const std::size_t g = spec.clusters3.size();
    if (g == 0 || spec.weights3.size() != g || spec.flip_probs3.size() != g)
      throw ValidationError("simulation: study 3 cluster lists are inconsistent");
    double sum = 0.0;
    for (double w : spec.weights3) {
      if (!(w > 0.0)) throw ValidationError("simulation: study 3 weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-8)
      throw ValidationError("simulation: study 3 weights must sum to 1");
    for (double p : spec.flip_probs3)
      if (!(p > 0.0 && p <= 0.5))
        throw ValidationError(cat("simulation: corruption probability ", p,
                                  " outside (0, 0.5]"));
  }
}

struct ClusterSampler {
  Vec mean;
  Matrix lower;  // Cholesky factor of the covariance
};

ClusterSampler make_sampler(const GaussianSpec& g) {
  ClusterSampler s;
  s.mean = g.mean;
  if (!cholesky(g.cov, s.lower))
    throw ValidationError("simulation: cluster covariance is not positive definite");
  return s;
}

Vec draw2(const ClusterSampler& s, Rng& rng) {
  double z0, z1;
  rng.normal_pair(z0, z1);
  return {s.mean[0] + s.lower(0, 0) * z0,
          s.mean[1] + s.lower(1, 0) * z0 + s.lower(1, 1) * z1};
}

/// Majority-vote map from fitted components to generating clusters, and the
/// resulting assignment accuracy.
double majority_accuracy(const MixtureFit& fit, const GroundTruth& truth) {
  const std::size_t n = fit.resp.n(), g = fit.resp.g();
  std::vector<std::size_t> assign(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < g; ++k) {
      const double z = fit.resp.z(i, k);
      if (z > best) {
        best = z;
        arg = k;
      }
    }
    assign[i] = arg;
  }
  const std::size_t nc = truth.cluster_means.size();
  std::vector<std::vector<std::size_t>> counts(g, std::vector<std::size_t>(nc, 0));
  for (std::size_t i = 0; i < n; ++i)
    counts[assign[i]][static_cast<std::size_t>(truth.cluster[i])] += 1;
  std::vector<std::size_t> majority(g, 0);
  for (std::size_t k = 0; k < g; ++k)
    majority[k] = static_cast<std::size_t>(
        std::max_element(counts[k].begin(), counts[k].end()) - counts[k].begin());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (majority[assign[i]] == static_cast<std::size_t>(truth.cluster[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::size_t majority_truth_of_component(const MixtureFit& fit, const GroundTruth& truth,
                                        std::size_t component) {
  const std::size_t nc = truth.cluster_means.size();
  std::vector<double> mass(nc, 0.0);
  for (std::size_t i = 0; i < fit.resp.n(); ++i)
    mass[static_cast<std::size_t>(truth.cluster[i])] += fit.resp.z(i, component);
  return static_cast<std::size_t>(
      std::max_element(mass.begin(), mass.end()) - mass.begin());
}

}  // namespace

SimSpec SimSpec::defaults(int study) {
  SimSpec spec;
  spec.study = study;
  // The off-diagonal cluster shared by studies 1 and 2.  The coordinate gap
  // (here 4.25) is the calibrated scale: the naive estimate's error is close
  // to flip_prob times this gap.
  spec.primary.mean = {6.0, 10.25};
  spec.primary.cov = Matrix::from_rows({{0.5, 0.1}, {0.1, 0.5}});
  switch (study) {
    case 1:
      spec.n = 300;
      spec.replicates = 100;
      spec.flip_probs = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};
      break;
    case 2:
      spec.n = 400;
      spec.replicates = 100;
      spec.flip_probs = {0.25};
      spec.taus = {0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
      // A cluster sitting on the diagonal, elongated along it; the swap maps
      // this distribution to itself.
      spec.diagonal.mean = {7.5, 7.5};
      spec.diagonal.cov = Matrix::from_rows({{0.5, 0.4}, {0.4, 0.5}});
      break;
    case 3:
      spec.n = 1000;
      spec.replicates = 10;
      spec.clusters3 = {
          {{4.0, 8.0}, Matrix::identity(2)},
          {{8.0, 4.0}, Matrix::identity(2)},
          {{10.0, 10.0}, Matrix::identity(2)},
      };
      spec.weights3 = {0.5, 0.3, 0.2};
      spec.flip_probs3 = {0.10, 0.20, 0.30};
      break;
    default:
      throw ValidationError(cat("simulation: unknown study ", study));
  }
  return spec;
}

Transformation study_transform(const SimSpec& spec) {
  if (spec.study == 3) return Transformation::rotation_scale2(120.0, 2.0);
  return Transformation::swap2();
}

std::pair<Dataset, GroundTruth> generate(const SimSpec& spec, double flip_prob,
                                         double tau, Rng& rng) {
  check_spec(spec);
  const Transformation transform = study_transform(spec);

  std::vector<ClusterSampler> samplers;
  std::vector<double> weights, flip_by_cluster;
  GroundTruth truth;
  if (spec.study == 1) {
    samplers = {make_sampler(spec.primary)};
    weights = {1.0};
    flip_by_cluster = {flip_prob};
    truth.true_g = 1;
  } else if (spec.study == 2) {
    if (!(tau > 0.5 && tau < 1.0))
      throw ValidationError(cat("simulation: tau ", tau, " outside (0.5, 1)"));
    samplers = {make_sampler(spec.primary), make_sampler(spec.diagonal)};
    weights = {tau, 1.0 - tau};
    flip_by_cluster = {flip_prob, flip_prob};
    truth.true_g = 2;
  } else {
    for (const auto& c : spec.clusters3) samplers.push_back(make_sampler(c));
    weights = spec.weights3;
    flip_by_cluster = spec.flip_probs3;
    truth.true_g = static_cast<int>(samplers.size());
  }
  if (spec.study != 3 && !(flip_prob > 0.0 && flip_prob <= 0.5))
    throw ValidationError(cat("simulation: corruption probability ", flip_prob,
                              " outside (0, 0.5]"));

  for (const auto& s : samplers) truth.cluster_means.push_back(s.mean);
  if (spec.study == 3) {
    // For study 3 the reference "expression" is the overall mixture mean.
    truth.primary_mean = {0.0, 0.0};
    for (std::size_t k = 0; k < samplers.size(); ++k)
      for (std::size_t j = 0; j < 2; ++j)
        truth.primary_mean[j] += weights[k] * samplers[k].mean[j];
  } else {
    truth.primary_mean = spec.primary.mean;
  }

  const std::size_t n = static_cast<std::size_t>(spec.n);
  std::vector<std::string> ids(n);
  std::vector<double> values(n * 2);
  truth.cluster.resize(n);
  truth.transformed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    if (samplers.size() > 1) {
      double u = rng.uniform();
      while (k + 1 < samplers.size() && u >= weights[k]) u -= weights[k], ++k;
    }
    Vec y = draw2(samplers[k], rng);
    const bool flipped = rng.bernoulli(flip_by_cluster[k]);
    if (flipped) y = transform.apply_forward(y);
    ids[i] = cat("p", i + 1);
    values[2 * i] = y[0];
    values[2 * i + 1] = y[1];
    truth.cluster[i] = static_cast<int>(k);
    truth.transformed[i] = flipped ? 1 : 0;
  }
  return {Dataset(std::move(ids), std::move(values), 2), std::move(truth)};
}

namespace {

ReplicateResult run_replicate(const SimSpec& spec, double flip_prob, double tau,
                              std::size_t cell, int rep, const EmConfig& config,
                              int g_max) {
  ReplicateResult r;
  r.replicate = rep;
  r.flip_prob = flip_prob;
  r.tau = tau;
  Rng rng = Rng(spec.seed).split(cell * 1000003ull + static_cast<std::uint64_t>(rep));
  auto [data, truth] = generate(spec, flip_prob, tau, rng);

  // Naive estimate: the analysis that ignores corruption entirely.
  const Vec naive = sample_mean(data);
  r.unaltered_mae = mean_abs_err(naive, truth.primary_mean);

  EmConfig em = config;
  em.seed = rng.next_u64();
  ModelSelection sel;
  try {
    sel = select_model(data, study_transform(spec), g_max, em);
  } catch (const NumericError&) {
    r.failed = true;
    return r;
  }
  r.chosen_g = sel.chosen_g;

  if (spec.study == 3) {
    // Corrected estimate: the mean of the dominant component, scored against
    // the generating cluster it mostly captured.
    const std::size_t largest =
        static_cast<std::size_t>(largest_cluster_index(sel.fit));
    const std::size_t matched = majority_truth_of_component(sel.fit, truth, largest);
    r.mcdc_mae = mean_abs_err(sel.fit.components[largest].mu,
                              truth.cluster_means[matched]);
  } else {
    r.mcdc_mae = mean_abs_err(estimate_expression(sel.fit), truth.primary_mean);
  }

  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool called = sel.fit.resp.xi(i) < 0.5;
    if (called != (truth.transformed[i] != 0)) ++r.flip_errors;
  }
  r.class_accuracy = majority_accuracy(sel.fit, truth);
  return r;
}

}  // namespace

StudyResult run_study(const SimSpec& spec, const EmConfig& config, int g_max,
                      int threads) {
  check_spec(spec);
  if (g_max < 1) throw ValidationError("run_study: g_max must be at least 1");

  struct CellParams {
    double flip_prob, tau;
  };
  std::vector<CellParams> cells;
  if (spec.study == 1) {
    for (double p : spec.flip_probs) cells.push_back({p, 0.0});
  } else if (spec.study == 2) {
    for (double t : spec.taus)
      for (double p : spec.flip_probs) cells.push_back({p, t});
  } else {
    cells.push_back({0.0, 0.0});
  }

  const std::size_t reps = static_cast<std::size_t>(spec.replicates);
  std::vector<ReplicateResult> flat(cells.size() * reps);
  parallel_for(flat.size(), threads, [&](std::size_t idx) {
    const std::size_t cell = idx / reps;
    const int rep = static_cast<int>(idx % reps);
    flat[idx] = run_replicate(spec, cells[cell].flip_prob, cells[cell].tau, cell,
                              rep, config, g_max);
  });

  StudyResult result;
  result.study = spec.study;
  const int true_g =
      spec.study == 3 ? static_cast<int>(spec.clusters3.size()) : spec.study;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellResult cr;
    cr.flip_prob = cells[c].flip_prob;
    cr.tau = cells[c].tau;
    cr.replicates = spec.replicates;
    double sum_un = 0, sum_mc = 0, sum_acc = 0;
    int usable = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const ReplicateResult& r = flat[c * reps + rep];
      cr.reps.push_back(r);
      if (r.failed) {
        ++cr.failed;
        continue;
      }
      ++usable;
      sum_un += r.unaltered_mae;
      sum_mc += r.mcdc_mae;
      sum_acc += r.class_accuracy;
      if (r.chosen_g == true_g) cr.frac_correct_g += 1.0;
      if (r.flip_errors == 0) ++cr.perfect_replicates;
      cr.max_flip_errors = std::max(cr.max_flip_errors, r.flip_errors);
    }
    cr.frac_correct_g /= static_cast<double>(spec.replicates);
    if (usable > 0) {
      cr.unaltered_mae = sum_un / usable;
      cr.mcdc_mae = sum_mc / usable;
      cr.mean_class_accuracy = sum_acc / usable;
      cr.mae_ratio = cr.mcdc_mae > 0 ? cr.unaltered_mae / cr.mcdc_mae
                                     : std::numeric_limits<double>::infinity();
    }
    result.cells.push_back(std::move(cr));
  }
  return result;
}

namespace {

std::string tau_field(const StudyResult& r, double tau) {
  return r.study == 2 ? csv::format_double(tau) : std::string();
}

}  // namespace

void write_summary_csv(const StudyResult& r, std::ostream& out) {
  csv::write_row(out, {"study", "flip_prob", "tau", "replicates", "failed",
                       "frac_correct_g", "unaltered_mae", "mcdc_mae", "mae_ratio",
                       "perfect_replicates", "max_flip_errors",
                       "mean_class_accuracy"});
  for (const auto& c : r.cells)
    csv::write_row(
        out, {std::to_string(r.study), csv::format_double(c.flip_prob),
              tau_field(r, c.tau), std::to_string(c.replicates),
              std::to_string(c.failed), csv::format_double(c.frac_correct_g),
              csv::format_double(c.unaltered_mae), csv::format_double(c.mcdc_mae),
              csv::format_double(c.mae_ratio), std::to_string(c.perfect_replicates),
              std::to_string(c.max_flip_errors),
              csv::format_double(c.mean_class_accuracy)});
}

void write_replicates_csv(const StudyResult& r, std::ostream& out) {
  csv::write_row(out, {"study", "flip_prob", "tau", "replicate", "failed",
                       "chosen_g", "unaltered_mae", "mcdc_mae", "flip_errors",
                       "class_accuracy"});
  for (const auto& c : r.cells)
    for (const auto& rep : c.reps)
      csv::write_row(
          out, {std::to_string(r.study), csv::format_double(c.flip_prob),
                tau_field(r, c.tau), std::to_string(rep.replicate),
                rep.failed ? "1" : "0", std::to_string(rep.chosen_g),
                csv::format_double(rep.unaltered_mae),
                csv::format_double(rep.mcdc_mae), std::to_string(rep.flip_errors),
                csv::format_double(rep.class_accuracy)});
}

std::string summary_json(const StudyResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json cell{
        {"flip_prob", c.flip_prob},
        {"replicates", c.replicates},
        {"failed", c.failed},
        {"frac_correct_g", c.frac_correct_g},
        {"unaltered_mae", c.unaltered_mae},
        {"mcdc_mae", c.mcdc_mae},
        {"mae_ratio", c.mae_ratio},
        {"perfect_replicates", c.perfect_replicates},
        {"max_flip_errors", c.max_flip_errors},
        {"mean_class_accuracy", c.mean_class_accuracy},
    };
    if (r.study == 2) cell["tau"] = c.tau;
    cells.push_back(std::move(cell));
  }
  nlohmann::json doc{{"study", r.study}, {"cells", std::move(cells)}};
  return doc.dump(2) + "\n";
}

}  // namespace mcdc
