// Release acceptance suite.  Ten end-to-end gates over the library and the
// command-line tool, printed one [PASS]/[FAIL] line each; the process exits
// nonzero when any gate fails.  Every seed and tolerance is fixed in this
// file so the run is reproducible bit for bit.
//
// The gates, in order:
//   1  simulation study 1: the single-cluster model is selected nearly always
//   2  simulation study 1: flip classification is near-perfect up to 40%
//   3  simulation study 1: error-reduction ratios match the reference table
//   4  simulation study 3: rotation+scale map, correct g and classification
//   5  EM monotonicity over randomized fits
//   6  E-step equals exhaustive joint-label enumeration on tiny instances
//   7  stationarity of converged fits (finite-difference gradient)
//   8  pipeline round trip on a 500-pair corpus with injected swaps
//   9  evaluation p-values reproduce the published confusion tables
//  10  CLI determinism: rerunning with one seed is byte-identical

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>
#include <vector>

#include "mcdc/correction.hpp"
#include "mcdc/em.hpp"
#include "mcdc/error.hpp"
#include "mcdc/model.hpp"
#include "mcdc/model_select.hpp"
#include "mcdc/netinfer.hpp"
#include "mcdc/pipeline.hpp"
#include "mcdc/rng.hpp"
#include "mcdc/simgen.hpp"

namespace fs = std::filesystem;
using namespace mcdc;
using Clock = std::chrono::steady_clock;

namespace {

// ---------------------------------------------------------------------------
// Fixed configuration.

constexpr std::uint64_t kStudySeed = 1;      // studies 1 and 3
constexpr double kRatioFloor05 = 4.0;        // gate 3: ratio at flip prob 0.05
constexpr double kRatioFloor40 = 20.0;       // gate 3: ratio at flip prob 0.40
constexpr double kMcdcMaeCap = 0.10;         // gate 3: corrected-estimate MAE
constexpr double kTableTolerance = 0.30;     // gate 3: relative band vs table
constexpr double kTrendTable1[9] = {0.22, 0.42, 0.63, 0.85, 1.07,
                                    1.27, 1.50, 1.73, 1.90};
constexpr double kMonotoneBudget = 1e-8;     // gate 5
constexpr double kEnumTolerance = 1e-10;     // gate 6
constexpr double kGradientBudget = 1e-4;     // gate 7
constexpr double kGradientStep = 1e-5;       // gate 7
constexpr double kStudy1TimeBudget = 600.0;  // gate 1, seconds

int g_failures = 0;

void report(int gate, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", gate, name,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int hardware_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

ComponentParams make_comp(Vec mu, Matrix sigma, double tau, double pi) {
  ComponentParams c;
  c.mu = std::move(mu);
  c.sigma = std::move(sigma);
  c.tau = tau;
  c.pi = pi;
  return c;
}

/// Draws n points from the mixture, corrupting each with probability 1 - pi
/// of its component.  Mirrors the generator the unit tests use.
Dataset draw_corrupted(Rng& rng, std::size_t n,
                       const std::vector<ComponentParams>& comps,
                       const Transformation& t,
                       std::vector<bool>* flipped = nullptr) {
  std::vector<std::string> ids;
  std::vector<double> values;
  if (flipped) flipped->assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform(), acc = 0;
    std::size_t k = 0;
    for (; k + 1 < comps.size(); ++k) {
      acc += comps[k].tau;
      if (u < acc) break;
    }
    Matrix l;
    if (!cholesky(comps[k].sigma, l)) std::abort();
    double z0, z1;
    rng.normal_pair(z0, z1);
    Vec y{comps[k].mu[0] + l(0, 0) * z0,
          comps[k].mu[1] + l(1, 0) * z0 + l(1, 1) * z1};
    if (rng.bernoulli(1.0 - comps[k].pi)) {
      y = t.apply_forward(y);
      if (flipped) (*flipped)[i] = true;
    }
    ids.push_back("p" + std::to_string(i));
    values.insert(values.end(), y.begin(), y.end());
  }
  return Dataset(std::move(ids), std::move(values), 2);
}

// ---------------------------------------------------------------------------
// Gates 1-3 share one full run of simulation study 1.

const CellResult* cell_at(const StudyResult& res, double flip_prob) {
  for (const auto& c : res.cells)
    if (std::abs(c.flip_prob - flip_prob) < 1e-12) return &c;
  return nullptr;
}

void gates_study1(const StudyResult& res, double elapsed_s) {
  const double probs[9] = {0.05, 0.10, 0.15, 0.20, 0.25,
                           0.30, 0.35, 0.40, 0.45};

  // Gate 1: g = 1 selected in at least 95% of all 900 datasets.
  int total = 0, correct_g = 0;
  for (const auto& c : res.cells)
    for (const auto& r : c.reps) {
      ++total;
      if (!r.failed && r.chosen_g == 1) ++correct_g;
    }
  bool ok1 = total == 900 && correct_g >= 855 && elapsed_s < kStudy1TimeBudget;
  report(1, "study 1 model selection", ok1,
         fmt("g=1 chosen in %d/%d datasets (need >= 855); grid runtime %.0f s "
             "(budget %.0f s)",
             correct_g, total, elapsed_s, kStudy1TimeBudget));

  // Gate 2: flip classification for flip prob <= 0.40.
  int reps40 = 0, perfect = 0, worst = 0, over5 = 0;
  for (int i = 0; i < 8; ++i) {
    const CellResult* c = cell_at(res, probs[i]);
    if (!c) continue;
    for (const auto& r : c->reps) {
      ++reps40;
      int errs = r.failed ? 300 : r.flip_errors;
      worst = std::max(worst, errs);
      if (errs == 0) ++perfect;
      if (errs > 5) ++over5;
    }
  }
  bool ok2 = reps40 == 800 && perfect >= 720 && over5 == 0;
  report(2, "study 1 flip classification", ok2,
         fmt("%d/%d datasets perfect (need >= 720), worst %d errors "
             "(cap 5), %d datasets over cap",
             perfect, reps40, worst, over5));

  // Gate 3: MAE levels, ratio trend, and the reference unaltered-MAE curve.
  bool mae_ok = true, trend_ok = true, table_ok = true;
  double r05 = 0, r40 = 0, worst_mae = 0, prev_ratio = 0, worst_rel = 0;
  for (int i = 0; i < 9; ++i) {
    const CellResult* c = cell_at(res, probs[i]);
    if (!c) {
      mae_ok = trend_ok = table_ok = false;
      break;
    }
    double rel = std::abs(c->unaltered_mae - kTrendTable1[i]) / kTrendTable1[i];
    worst_rel = std::max(worst_rel, rel);
    if (rel > kTableTolerance) table_ok = false;
    if (i < 8) {  // flip prob <= 0.40
      worst_mae = std::max(worst_mae, c->mcdc_mae);
      if (c->mcdc_mae > kMcdcMaeCap) mae_ok = false;
      if (i > 0 && c->mae_ratio < prev_ratio) trend_ok = false;
      prev_ratio = c->mae_ratio;
      if (i == 0) r05 = c->mae_ratio;
      if (i == 7) r40 = c->mae_ratio;
    }
  }
  bool ok3 = mae_ok && trend_ok && table_ok && r05 >= kRatioFloor05 &&
             r40 >= kRatioFloor40;
  report(3, "study 1 error reduction", ok3,
         fmt("corrected MAE <= %.3f (cap %.2f); ratio %.1f at p=0.05 "
             "(floor %.0f) rising %sto %.1f at p=0.40 (floor %.0f); unaltered "
             "MAE within %.0f%% of table (worst %.0f%%)",
             worst_mae, kMcdcMaeCap, r05, kRatioFloor05,
             trend_ok ? "monotonically " : "NON-MONOTONICALLY ", r40,
             kRatioFloor40, kTableTolerance * 100, worst_rel * 100));
}

// ---------------------------------------------------------------------------
// Gate 4: simulation study 3 (rotation by 120 degrees + scaling by 2).

void gate4_study3() {
  SimSpec spec = SimSpec::defaults(3);
  Rng rng(Rng(kStudySeed).split(0).seed());
  auto [data, truth] = generate(spec, 0.0, 0.0, rng);
  Transformation t = study_transform(spec);

  EmConfig cfg;
  cfg.seed = 99;
  ModelSelection sel = select_model(data, t, 9, cfg);

  int errors = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    errors += ((sel.fit.resp.xi(i) < 0.5) != (truth.transformed[i] != 0));
  double accuracy = 1.0 - double(errors) / double(data.size());
  bool ok = sel.chosen_g == 3 && accuracy >= 0.99;
  report(4, "study 3 rotation+scale", ok,
         fmt("chosen g=%d (need 3); transformed/untransformed accuracy "
             "%.4f over %zu points (need >= 0.99)",
             sel.chosen_g, accuracy, data.size()));
}

// ---------------------------------------------------------------------------
// Gate 5: the observed log likelihood never falls along any EM trace.

void gate5_monotonicity() {
  double worst_drop = 0.0;
  int fits = 0, redraws = 0;
  long iters = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(40'000 + trial);
    Transformation t = (trial % 2 == 0)
                           ? Transformation::swap2()
                           : Transformation::rotation_scale2(120.0, 2.0);
    // One restart per fit so the returned trace is the whole story.  A lone
    // restart can collapse (a component starves when the requested g exceeds
    // what the draw supports), in which case the whole instance is redrawn:
    // the gate needs 200 traces, not a fit of every conceivable instance.
    for (int attempt = 0; attempt < 50; ++attempt) {
      std::size_t n = 50 + rng.uniform_index(451);
      int g_true = 1 + int(rng.uniform_index(4));
      std::vector<ComponentParams> comps;
      double tau_sum = 0;
      for (int k = 0; k < g_true; ++k) {
        Matrix a(2, 2);
        for (std::size_t r = 0; r < 2; ++r)
          for (std::size_t c = 0; c < 2; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
        Matrix sigma(2, 2);
        for (std::size_t r = 0; r < 2; ++r)
          for (std::size_t c = 0; c < 2; ++c)
            sigma(r, c) = a(r, 0) * a(c, 0) + a(r, 1) * a(c, 1) +
                          (r == c ? 0.4 : 0.0);
        comps.push_back(
            make_comp({rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)}, sigma,
                      0.2 + rng.uniform(), rng.uniform(0.55, 0.95)));
        tau_sum += comps.back().tau;
      }
      for (auto& c : comps) c.tau /= tau_sum;
      Dataset data = draw_corrupted(rng, n, comps, t);
      int fit_g = 1 + int(rng.uniform_index(4));

      EmConfig cfg;
      cfg.restarts = 1;
      cfg.max_iter = 500;
      cfg.seed = 90'000 + 100 * trial + attempt;
      try {
        MixtureFit fit = run_em(data, fit_g, t, cfg);
        for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
          worst_drop = std::max(
              worst_drop, fit.loglik_trace[i - 1] - fit.loglik_trace[i]);
        ++fits;
        iters += long(fit.loglik_trace.size());
        break;
      } catch (const NumericError&) {
        ++redraws;  // degenerate restart; redraw the instance
      }
    }
  }
  bool ok = fits == 200 && worst_drop <= kMonotoneBudget;
  report(5, "EM monotonicity", ok,
         fmt("%d/200 randomized fits (%d instances redrawn), %ld iterations "
             "total, worst single-iteration drop %.3g (budget %.0e)",
             fits, redraws, iters, worst_drop, kMonotoneBudget));
}

// ---------------------------------------------------------------------------
// Gate 6: E-step vs. brute-force enumeration of every joint label assignment.

void gate6_enumeration() {
  // Online log-sum-exp accumulator.
  struct Lse {
    double m = -std::numeric_limits<double>::infinity(), s = 0.0;
    void add(double lw) {
      if (lw <= m) {
        s += std::exp(lw - m);
      } else {
        s = s * std::exp(m - lw) + 1.0;
        m = lw;
      }
    }
    double value() const { return m + std::log(s); }
  };

  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(60'000 + trial);
    std::size_t n = 2 + rng.uniform_index(5);   // 2..6
    int g = 1 + int(rng.uniform_index(2));      // 1..2
    const Transformation t = [&] {
      switch (trial % 3) {
        case 0: return Transformation::swap2();
        case 1: return Transformation::rotation_scale2(120.0, 2.0);
        default:
          return Transformation::linear(
              Matrix::from_rows({{1.3, 0.4}, {-0.2, 0.9}}));
      }
    }();
    std::vector<ComponentParams> comps;
    double tau_sum = 0;
    for (int k = 0; k < g; ++k) {
      Matrix a(2, 2);
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
      Matrix sigma(2, 2);
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c)
          sigma(r, c) = a(r, 0) * a(c, 0) + a(r, 1) * a(c, 1) +
                        (r == c ? 0.5 : 0.0);
      comps.push_back(make_comp({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)},
                                sigma, 0.25 + rng.uniform(),
                                rng.uniform(0.15, 0.9)));
      tau_sum += comps.back().tau;
    }
    for (auto& c : comps) c.tau /= tau_sum;
    Dataset data = draw_corrupted(rng, n, comps, t);

    // Per-point, per-label log terms: label 2k is (cluster k, untransformed),
    // label 2k+1 is (cluster k, transformed).
    const std::size_t labels = 2 * std::size_t(g);
    std::vector<double> term(n * labels);
    for (std::size_t i = 0; i < n; ++i) {
      Vec back = t.apply_inverse(data.row(i));
      for (int k = 0; k < g; ++k) {
        term[i * labels + 2 * k] =
            std::log(comps[k].tau) + std::log(comps[k].pi) +
            gaussian_log_density(data.row(i), comps[k]);
        term[i * labels + 2 * k + 1] =
            std::log(comps[k].tau) + std::log1p(-comps[k].pi) +
            gaussian_log_density(back, comps[k]);
      }
    }

    // Walk all labels^n joint assignments and marginalize.
    std::vector<Lse> marginal(n * labels);
    Lse total;
    std::vector<std::size_t> assign(n, 0);
    while (true) {
      double lw = 0;
      for (std::size_t i = 0; i < n; ++i) lw += term[i * labels + assign[i]];
      total.add(lw);
      for (std::size_t i = 0; i < n; ++i) marginal[i * labels + assign[i]].add(lw);
      std::size_t pos = 0;
      while (pos < n && ++assign[pos] == labels) assign[pos++] = 0;
      if (pos == n) break;
    }

    Responsibilities r = e_step(data, comps, t);
    for (std::size_t i = 0; i < n; ++i) {
      double xi = 0;
      for (int k = 0; k < g; ++k) {
        double z = std::exp(marginal[i * labels + 2 * k].value() - total.value()) +
                   std::exp(marginal[i * labels + 2 * k + 1].value() - total.value());
        xi += std::exp(marginal[i * labels + 2 * k].value() - total.value());
        worst = std::max(worst, std::abs(r.z(i, std::size_t(k)) - z));
      }
      worst = std::max(worst, std::abs(r.xi(i) - xi));
    }
  }
  bool ok = worst <= kEnumTolerance;
  report(6, "E-step enumeration oracle", ok,
         fmt("50 instances, worst |responsibility - enumeration| = %.3g "
             "(tolerance %.0e)",
             worst, kEnumTolerance));
}

// ---------------------------------------------------------------------------
// Gate 7: converged fits sit at stationary points of the log likelihood.

void gate7_stationarity() {
  double worst = 0.0;
  int converged = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    std::size_t n = 100 + 2 * std::size_t(trial);
    std::vector<ComponentParams> comps;
    if (trial % 2 == 0) {
      comps.push_back(make_comp({2.0, 7.0},
                                Matrix::from_rows({{0.49, 0.0}, {0.0, 0.49}}),
                                1.0, 0.8));
    } else {
      comps.push_back(make_comp({2.0, 7.0},
                                Matrix::from_rows({{0.49, 0.0}, {0.0, 0.49}}),
                                0.6, 0.8));
      comps.push_back(make_comp({11.0, 16.0},
                                Matrix::from_rows({{0.49, 0.0}, {0.0, 0.49}}),
                                0.4, 0.75));
    }
    Transformation t = Transformation::swap2();
    Dataset data = draw_corrupted(rng, n, comps, t);

    EmConfig cfg;
    cfg.rel_tol = 1e-14;
    cfg.max_iter = 20'000;
    cfg.restarts = 5;
    cfg.seed = 900 + trial;
    MixtureFit fit = run_em(data, int(comps.size()), t, cfg);
    if (!fit.converged) continue;
    ++converged;

    for (std::size_t k = 0; k < fit.components.size(); ++k)
      for (std::size_t j = 0; j < 2; ++j) {
        auto plus = fit.components, minus = fit.components;
        plus[k].mu[j] += kGradientStep;
        minus[k].mu[j] -= kGradientStep;
        double grad = (observed_log_likelihood(data, plus, t) -
                       observed_log_likelihood(data, minus, t)) /
                      (2 * kGradientStep);
        worst = std::max(worst, std::abs(grad));
      }
  }
  bool ok = converged == 20 && worst < kGradientBudget;
  report(7, "stationarity at convergence", ok,
         fmt("%d/20 fits converged; worst finite-difference mean gradient "
             "%.3g (budget %.0e, step %.0e)",
             converged, worst, kGradientBudget, kGradientStep));
}

// ---------------------------------------------------------------------------
// Gate 8: full pipeline round trip on a synthetic paired-gene corpus.

void gate8_pipeline() {
  const std::size_t npairs = 500, nrows = 2000;
  auto t0 = Clock::now();

  ExpressionMatrix matrix;
  std::vector<GenePair> pairs;
  std::vector<std::set<std::string>> injected(npairs);
  std::map<std::string, double> baseline;

  matrix.genes.reserve(2 * npairs);
  for (std::size_t p = 0; p < npairs; ++p) {
    std::string stem = fmt("g%04zu", p);
    matrix.genes.push_back(stem + "a");
    matrix.genes.push_back(stem + "b");
    pairs.push_back({fmt("pair%04zu", p), stem + "a", stem + "b"});
  }
  for (std::size_t g = 0; g < matrix.genes.size(); ++g)
    matrix.gene_index[matrix.genes[g]] = g;
  for (std::size_t r = 0; r < nrows; ++r)
    matrix.experiments.push_back(fmt("e%04zu", r));
  matrix.values.resize(nrows * matrix.genes.size());

  Rng corpus_rng(7);
  for (std::size_t p = 0; p < npairs; ++p) {
    Rng rng = corpus_rng.split(p);
    double mu_a = rng.uniform(4.0, 12.0);
    double offset = rng.uniform(2.5, 6.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    double mu_b = mu_a + offset;
    baseline[pairs[p].gene_a] = mu_a;
    baseline[pairs[p].gene_b] = mu_b;
    for (std::size_t r = 0; r < nrows; ++r) {
      double z0, z1;
      rng.normal_pair(z0, z1);
      double a = mu_a + 0.3 * z0, b = mu_b + 0.3 * z1;
      if (rng.bernoulli(0.10)) {
        std::swap(a, b);
        injected[p].insert(matrix.experiments[r]);
      }
      matrix.value(r, 2 * p) = a;
      matrix.value(r, 2 * p + 1) = b;
    }
  }

  PipelineConfig cfg;
  cfg.g_max = 3;
  cfg.em.restarts = 3;
  cfg.em.max_iter = 300;
  cfg.em.seed = 1;
  cfg.threads = hardware_threads();
  PipelineResult res = correct_all_pairs(matrix, pairs, cfg);

  std::size_t injected_total = 0, recovered = 0, spurious = 0, failed = 0;
  for (std::size_t p = 0; p < npairs; ++p) {
    injected_total += injected[p].size();
    if (res.reports[p].failed) {
      ++failed;
      continue;
    }
    for (const auto& id : res.reports[p].report.flipped_ids) {
      if (injected[p].count(id))
        ++recovered;
      else
        ++spurious;
    }
  }
  double recovery = double(recovered) / double(injected_total);

  RegressionMse corrected =
      baseline_mse(expression_estimates(pairs, res.reports), baseline);
  RegressionMse unaltered =
      baseline_mse(column_mean_estimates(matrix, pairs), baseline);
  double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();

  bool ok = recovery >= 0.95 && corrected.mse < unaltered.mse && failed == 0;
  report(8, "pipeline round trip", ok,
         fmt("%zu/%zu injected swaps corrected (%.2f%%, need >= 95%%), "
             "%zu spurious, %zu failed pairs; baseline MSE %.4g corrected vs "
             "%.4g unaltered; %.0f s",
             recovered, injected_total, recovery * 100, spurious, failed,
             corrected.mse, unaltered.mse, elapsed));
}

// ---------------------------------------------------------------------------
// Gate 9: p-values from the published 2x2 confusion tables.

void gate9_pvalues() {
  // cutoff 0.5 counts: 41 true of 302 called (unaltered), 63 of 463 (MCDC),
  // against 4,193 reference edges over a 43,290-pair universe.
  double p_unaltered = evaluation_pvalue(41, 261, 4152, 38836);
  double p_mcdc = evaluation_pvalue(63, 400, 4130, 38697);
  bool ok = p_unaltered >= 0.01 && p_unaltered <= 0.04 && p_mcdc >= 0.002 &&
            p_mcdc <= 0.008;
  report(9, "published p-values", ok,
         fmt("unaltered table -> %.4f (published ~0.02, factor-2 band "
             "[0.01, 0.04]); corrected table -> %.4f (published ~0.004, "
             "band [0.002, 0.008])",
             p_unaltered, p_mcdc));
}

// ---------------------------------------------------------------------------
// Gate 10: byte-identical CLI reruns under a fixed seed.

int run_cli(const std::string& args) {
  std::string cmd = std::string(MCDC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return in.good() || in.eof() ? ss.str() : std::string("<unreadable>");
}

void gate10_determinism() {
  fs::path tmp = fs::temp_directory_path() /
                 ("mcdc_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  auto file = [&](const std::string& name, const std::string& content) {
    std::ofstream out(tmp / name);
    out << content;
    return (tmp / name).string();
  };

  // Paired-expression fixture for `correct`.
  Rng rng(4096);
  std::ostringstream m;
  m << "experiment_id,a1,a2,b1,b2\n";
  for (int r = 0; r < 60; ++r) {
    double a = 2.0 + 0.3 * rng.normal(), b = 8.0 + 0.3 * rng.normal();
    double c = 4.0 + 0.3 * rng.normal(), d = 11.0 + 0.3 * rng.normal();
    if (r % 10 == 3) std::swap(a, b);
    if (r % 12 == 5) std::swap(c, d);
    m << "e" << r << "," << a << "," << b << "," << c << "," << d << "\n";
  }
  std::string matrix = file("matrix.csv", m.str());
  std::string pmap = file("pairs.csv", "pair_id,gene_a,gene_b\npr1,a1,a2\npr2,b1,b2\n");
  std::string base = file("baseline.csv", "gene_id,value\na1,2\na2,8\nb1,4\nb2,11\n");

  // Knockdown fixture for `infer-edges` / `evaluate`.
  std::ostringstream kd;
  kd << "experiment_id,plate_id,knockdown_gene,g1,g2,g3\n";
  for (int i = 0; i < 6; ++i) {
    double x = 2.0 + 0.2 * rng.normal();
    kd << "k" << i << ",p1,g1," << x << "," << (10.0 - 2.0 * x + 0.05 * rng.normal())
       << "," << rng.normal() << "\n";
  }
  std::string kdp = file("kd.csv", kd.str());
  std::ostringstream ctrl;
  ctrl << "experiment_id,plate_id,g1,g2,g3\n";
  for (int i = 0; i < 8; ++i)
    ctrl << "c" << i << ",p1," << 5.0 + rng.normal() << "," << 6.0 + rng.normal()
         << "," << rng.normal() << "\n";
  std::string ctrlp = file("ctrl.csv", ctrl.str());
  std::string truth = file("truth.csv", "regulator,target\ng1,g2\n");

  struct Round {
    fs::path dir;
    std::vector<std::string> files;
  };
  bool all_ok = true;
  std::string fail_note;
  Round rounds[2];
  for (int round = 0; round < 2; ++round) {
    fs::path out = tmp / ("round" + std::to_string(round));
    fs::create_directories(out);
    rounds[round].dir = out;

    int c1 = run_cli("correct --matrix " + matrix + " --pairs " + pmap +
                     " --baseline " + base + " --gmax 2 --restarts 4 --seed 37" +
                     " --out-dir " + (out / "corr").string());
    int c2 = run_cli("simulate --study 1 --n 60 --replicates 2 --gmax 3"
                     " --restarts 2 --seed 9 --out-dir " +
                     (out / "sim").string());
    int c3 = run_cli("infer-edges --knockdowns " + kdp + " --controls " + ctrlp +
                     " --out " + (out / "edges.csv").string());
    int c4 = run_cli("evaluate --edges " + (out / "edges.csv").string() +
                     " --truth " + truth + " --cutoff 0.5 --out " +
                     (out / "eval.json").string());
    if (c1 != 0 || c2 != 0 || c3 != 0 || c4 != 0) {
      all_ok = false;
      fail_note = fmt("CLI exit codes %d/%d/%d/%d on round %d", c1, c2, c3, c4,
                      round);
    }
    rounds[round].files = {"corr/corrected_matrix.csv",
                           "corr/reports.json",
                           "corr/mse_comparison.json",
                           "sim/study1_summary.csv",
                           "sim/study1_replicates.csv",
                           "sim/study1_summary.json",
                           "edges.csv",
                           "eval.json",
                           "eval.pr.csv"};
  }

  std::size_t compared = 0;
  if (all_ok) {
    for (const auto& rel : rounds[0].files) {
      std::string a = slurp(rounds[0].dir / rel), b = slurp(rounds[1].dir / rel);
      if (a == "<unreadable>" || a != b) {
        all_ok = false;
        fail_note = "mismatch or missing file: " + rel;
        break;
      }
      ++compared;
    }
  }
  fs::remove_all(tmp);
  report(10, "CLI determinism", all_ok,
         all_ok ? fmt("correct+simulate+infer-edges+evaluate rerun with fixed "
                      "seeds: %zu output files byte-identical",
                      compared)
                : fail_note);
}

}  // namespace

int main() {
  auto t0 = Clock::now();

  // One full study-1 grid feeds the first three gates.
  SimSpec spec = SimSpec::defaults(1);
  spec.seed = kStudySeed;
  EmConfig em;  // library defaults: 10 restarts, g swept to 9 below
  auto t_grid = Clock::now();
  StudyResult study1 = run_study(spec, em, 9, hardware_threads());
  double grid_s = std::chrono::duration<double>(Clock::now() - t_grid).count();

  gates_study1(study1, grid_s);
  gate4_study3();
  gate5_monotonicity();
  gate6_enumeration();
  gate7_stationarity();
  gate8_pipeline();
  gate9_pvalues();
  gate10_determinism();

  double total_s = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%d/10 gates passed in %.0f s\n", 10 - g_failures, total_s);
  return g_failures == 0 ? 0 : 1;
}
