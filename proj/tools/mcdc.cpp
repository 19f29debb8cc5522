// Command-line front end: dataset correction, the simulation studies,
// network inference and its evaluation.
//
// Exit codes: 0 on success, 2 on bad input (including bad arguments),
// 1 on internal failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mcdc/csv.hpp"
#include "mcdc/error.hpp"
#include "mcdc/netinfer.hpp"
#include "mcdc/pipeline.hpp"
#include "mcdc/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CorrectArgs {
  std::string matrix, pairs, baseline, out_dir;
  int gmax = 9, restarts = 10, threads = 1;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  int study = 1;
  std::string out_dir;
  std::uint64_t seed = 0;
  int replicates = 0, n = 0;  // 0 keeps the study default
  int gmax = 9, restarts = 10, threads = 1;
};

struct InferArgs {
  std::string knockdowns, controls, out, corrected_dir;
  double prior = 0.5;
  int threads = 1;
};

struct EvaluateArgs {
  std::string edges, truth, out;
  std::vector<double> cutoffs;
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw mcdc::ValidationError(mcdc::cat("cannot write file '", path, "'"));
  out << text;
  if (!out) throw mcdc::Error(mcdc::cat("write failed for '", path, "'"));
}

std::string corrected_name(const std::string& input_path) {
  return "corrected_" + fs::path(input_path).filename().string();
}

json mse_to_json(const mcdc::RegressionMse& m) {
  return json{{"mse", m.mse},
              {"slope", m.slope},
              {"intercept", m.intercept},
              {"n_genes", m.n_genes}};
}

int run_correct(const CorrectArgs& args) {
  const auto matrix = mcdc::load_expression_matrix(args.matrix);
  const auto pairs = mcdc::load_pair_map(args.pairs);

  mcdc::PipelineConfig config;
  config.g_max = args.gmax;
  config.em.restarts = args.restarts;
  config.em.seed = args.seed;
  config.threads = args.threads;
  const auto result = mcdc::correct_all_pairs(matrix, pairs, config);

  fs::create_directories(args.out_dir);
  const fs::path out_dir(args.out_dir);
  mcdc::save_expression_matrix(result.corrected,
                               (out_dir / corrected_name(args.matrix)).string());
  write_text_file((out_dir / "reports.json").string(),
                  mcdc::reports_json(result.reports));

  int failed = 0;
  for (const auto& r : result.reports) failed += r.failed ? 1 : 0;
  std::cerr << "corrected " << (result.reports.size() - failed) << "/"
            << result.reports.size() << " pairs\n";

  if (!args.baseline.empty()) {
    const auto baseline = mcdc::load_baseline(args.baseline);
    const auto unaltered =
        mcdc::baseline_mse(mcdc::column_mean_estimates(matrix, pairs), baseline);
    const auto corrected = mcdc::baseline_mse(
        mcdc::expression_estimates(pairs, result.reports), baseline);
    const json doc{{"unaltered", mse_to_json(unaltered)},
                   {"corrected", mse_to_json(corrected)}};
    write_text_file((out_dir / "mse_comparison.json").string(), doc.dump(2) + "\n");
  }
  return 0;
}

int run_simulate(const SimulateArgs& args) {
  mcdc::SimSpec spec = mcdc::SimSpec::defaults(args.study);
  spec.seed = args.seed;
  if (args.replicates > 0) spec.replicates = args.replicates;
  if (args.n > 0) spec.n = args.n;

  mcdc::EmConfig em;
  em.restarts = args.restarts;
  const auto result = mcdc::run_study(spec, em, args.gmax, args.threads);

  fs::create_directories(args.out_dir);
  const fs::path out_dir(args.out_dir);
  const std::string tag = "study" + std::to_string(args.study);
  {
    std::ofstream out(out_dir / (tag + "_summary.csv"));
    mcdc::write_summary_csv(result, out);
  }
  {
    std::ofstream out(out_dir / (tag + "_replicates.csv"));
    mcdc::write_replicates_csv(result, out);
  }
  write_text_file((out_dir / (tag + "_summary.json")).string(),
                  mcdc::summary_json(result));
  return 0;
}

int run_infer(const InferArgs& args) {
  std::string kd_path = args.knockdowns, ctrl_path = args.controls;
  if (!args.corrected_dir.empty()) {
    // Prefer corrected versions produced by `mcdc correct` when present.
    for (auto* path : {&kd_path, &ctrl_path}) {
      const fs::path candidate = fs::path(args.corrected_dir) / corrected_name(*path);
      if (fs::exists(candidate)) *path = candidate.string();
    }
  }
  const auto knockdowns = mcdc::load_expression_matrix(kd_path);
  const auto controls = mcdc::load_expression_matrix(ctrl_path);
  const auto standardized = mcdc::standardize_knockdowns(knockdowns, controls);
  if (!standardized.skipped.empty())
    std::cerr << "skipped " << standardized.skipped.size()
              << " plate/gene combinations with zero control variance\n";
  const auto edges = mcdc::infer_edges(standardized, args.prior, args.threads);
  mcdc::save_edges(edges, args.out);
  std::cerr << "scored " << edges.size() << " candidate edges\n";
  return 0;
}

int run_evaluate(const EvaluateArgs& args) {
  const auto edges = mcdc::load_edges(args.edges);
  const auto truth = mcdc::load_truth(args.truth);
  std::vector<double> cutoffs = args.cutoffs;
  if (cutoffs.empty()) cutoffs = {0.5, 0.95};

  json rows = json::array();
  for (const double cutoff : cutoffs) {
    const auto e = mcdc::evaluate_edges(edges, truth, cutoff);
    rows.push_back(json{{"cutoff", e.cutoff},
                        {"tp", e.tp},
                        {"fp", e.fp},
                        {"fn", e.fn},
                        {"tn", e.tn},
                        {"p_value", e.p_value}});
  }
  const auto curve = mcdc::precision_recall(edges, truth);
  long truth_in_universe = 0;
  for (const auto& s : edges)
    truth_in_universe += truth.count({s.regulator, s.target});
  const json doc{{"edges", edges.size()},
                 {"truth_edges_in_universe", truth_in_universe},
                 {"cutoffs", rows}};
  write_text_file(args.out, doc.dump(2) + "\n");

  fs::path pr_path(args.out);
  pr_path.replace_extension(".pr.csv");
  std::ofstream pr(pr_path);
  if (!pr)
    throw mcdc::ValidationError(mcdc::cat("cannot write file '", pr_path.string(), "'"));
  mcdc::csv::write_row(pr, {"posterior", "recall", "precision"});
  for (const auto& point : curve)
    mcdc::csv::write_row(pr, {mcdc::csv::format_double(point.posterior),
                              mcdc::csv::format_double(point.recall),
                              mcdc::csv::format_double(point.precision)});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture-model correction of corrupted expression data"};
  app.require_subcommand(1);

  CorrectArgs correct_args;
  auto* correct = app.add_subcommand(
      "correct", "Correct swapped gene pairs in an expression matrix");
  correct->add_option("--matrix", correct_args.matrix, "Expression matrix CSV")
      ->required();
  correct->add_option("--pairs", correct_args.pairs, "Pair map CSV")->required();
  correct->add_option("--baseline", correct_args.baseline,
                      "Reference expression CSV for the MSE comparison");
  correct->add_option("--out-dir", correct_args.out_dir, "Output directory")
      ->required();
  correct->add_option("--gmax", correct_args.gmax, "Largest component count tried")
      ->check(CLI::PositiveNumber);
  correct->add_option("--restarts", correct_args.restarts, "EM restarts")
      ->check(CLI::PositiveNumber);
  correct->add_option("--seed", correct_args.seed, "Random seed");
  correct->add_option("--threads", correct_args.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation study");
  simulate->add_option("--study", sim_args.study, "Study number")
      ->required()
      ->check(CLI::Range(1, 3));
  simulate->add_option("--out-dir", sim_args.out_dir, "Output directory")->required();
  simulate->add_option("--seed", sim_args.seed, "Random seed");
  simulate->add_option("--replicates", sim_args.replicates,
                       "Datasets per grid cell (0 keeps the study default)");
  simulate->add_option("--n", sim_args.n,
                       "Points per dataset (0 keeps the study default)");
  simulate->add_option("--gmax", sim_args.gmax, "Largest component count tried")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--restarts", sim_args.restarts, "EM restarts")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--threads", sim_args.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer-edges",
                                   "Score regulator-target edges from knockdowns");
  infer->add_option("--knockdowns", infer_args.knockdowns, "Knockdown matrix CSV")
      ->required();
  infer->add_option("--controls", infer_args.controls, "Control matrix CSV")
      ->required();
  infer->add_option("--out", infer_args.out, "Output edge list CSV")->required();
  infer->add_option("--prior", infer_args.prior, "Prior edge probability");
  infer->add_option("--corrected-dir", infer_args.corrected_dir,
                    "Directory with corrected matrices from `mcdc correct`");
  infer->add_option("--threads", infer_args.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate",
                                      "Compare an edge list against reference edges");
  evaluate->add_option("--edges", eval_args.edges, "Edge list CSV")->required();
  evaluate->add_option("--truth", eval_args.truth, "Reference edges CSV")->required();
  evaluate->add_option("--cutoff", eval_args.cutoffs,
                       "Posterior cutoff(s); default 0.5 and 0.95");
  evaluate->add_option("--out", eval_args.out, "Output JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad arguments are validation errors
  }

  try {
    if (correct->parsed()) return run_correct(correct_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (infer->parsed()) return run_infer(infer_args);
    if (evaluate->parsed()) return run_evaluate(eval_args);
  } catch (const mcdc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
