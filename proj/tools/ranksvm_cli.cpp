#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ranksvm/experiment.hpp"
#include "ranksvm/letor.hpp"
#include "ranksvm/metrics.hpp"
#include "ranksvm/penalties.hpp"
#include "ranksvm/solver.hpp"
#include "ranksvm/synth.hpp"

namespace fs = std::filesystem;
using namespace ranksvm;

namespace {

constexpr int kExitBadFlags = 2;
constexpr int kExitDataError = 3;
constexpr int kExitSolverError = 4;

struct PenaltyFlags {
  std::string name = "l1";
  double p = 0.5;
  double eps = 0.1;
  double gamma = 2.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--penalty", name, "Penalty: l1, lp, log or mcp")
        ->check(CLI::IsMember({"l1", "lp", "log", "mcp"}));
    cmd->add_option("--p", p, "Exponent for the lp penalty (0 < p < 1)");
    cmd->add_option("--eps", eps, "Epsilon for the log penalty");
    cmd->add_option("--gamma", gamma, "Gamma for the mcp penalty");
  }

  PenaltySpec spec() const {
    PenaltySpec out;
    out.kind = penalty_kind_from_string(name);
    out.p = p;
    out.epsilon = eps;
    out.gamma = gamma;
    return out;
  }
};

int default_threads() {
  if (const char* env = std::getenv("RANKSVM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

void echo_config(const CLI::App& cmd) {
  std::cout << "# " << cmd.get_name();
  for (const auto* opt : cmd.get_options()) {
    if (opt->count() == 0 && opt->get_default_str().empty()) continue;
    const std::string value = opt->count() ? opt->results()[0] : opt->get_default_str();
    std::cout << ' ' << opt->get_name() << '=' << value;
  }
  std::cout << '\n';
}

std::vector<double> parse_c_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
  return grid;
}

int cmd_train(const std::string& data_path, const PenaltyFlags& penalty_flags, double c,
              bool normalize, const std::string& out_path) {
  Dataset dataset;
  try {
    dataset = parse_letor_file(data_path);
    if (normalize) dataset = normalize_query_minmax(dataset);
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  }
  const PreferencePairs pairs = build_preference_pairs(dataset);
  if (pairs.count() == 0) {
    std::cerr << "data error: no preference pairs in '" << data_path << "'\n";
    return kExitDataError;
  }

  SolverConfig config;
  config.c = c;
  PenaltySpec spec = penalty_flags.spec();
  spec.lambda = config.lambda();

  FitResult fit;
  try {
    fit = spec.is_convex() ? fista_solve(pairs, dataset, spec, config)
                           : reweighted_solve(pairs, dataset, spec, config);
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolverError;
  }

  std::cout << "pairs=" << pairs.count() << " queries=" << dataset.num_queries()
            << " dim=" << dataset.dimension() << '\n';
  std::cout << "objective: initial=" << format_g17(fit.objective_trace.front())
            << " final=" << format_g17(fit.objective_trace.back()) << '\n';
  std::cout << "iterations: inner=" << fit.inner_iterations << " outer=" << fit.outer_iterations
            << " converged=" << (fit.converged ? "yes" : "no") << '\n';
  std::cout << "nonzero=" << fit.nonzero_count << " of " << dataset.num_active_features()
            << " active features\n";

  if (!out_path.empty()) {
    ModelFile model{fit.weights, spec, c, fit.converged};
    try {
      save_model(model, out_path);
    } catch (const std::exception& e) {
      std::cerr << "data error: " << e.what() << '\n';
      return kExitDataError;
    }
    std::cout << "model written to " << out_path << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, int k,
             bool normalize, const std::string& out_path) {
  ModelFile model;
  Dataset dataset;
  try {
    model = load_model(model_path);
    dataset = parse_letor_file(data_path);
    if (normalize) dataset = normalize_query_minmax(dataset);
    if (model.weights.size() != dataset.dimension())
      throw std::runtime_error("model dimension " + std::to_string(model.weights.size()) +
                               " does not match data dimension " +
                               std::to_string(dataset.dimension()));
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  }

  const int active = static_cast<int>(dataset.num_active_features());
  const EvalReport report = evaluate_model(model.weights, dataset, k, active);
  std::cout << "queries=" << report.per_query_ap.size() << '\n';
  std::cout << "map=" << format_g17(report.map) << '\n';
  std::cout << "ndcg@" << k << "=" << format_g17(report.mean_ndcg) << '\n';
  std::cout << "sparsity_ratio=" << format_g17(report.sparsity_ratio) << " (" << report.nonzero_features
            << "/" << report.active_features << ")\n";

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "data error: cannot write '" << out_path << "'\n";
      return kExitDataError;
    }
    out << "qid,ap,ndcg_at_k\n";
    const auto& qids = dataset.query_order();
    for (std::size_t q = 0; q < qids.size(); ++q) {
      out << qids[q] << ',' << format_g17(report.per_query_ap[q]) << ',';
      if (report.per_query_ndcg[q])
        out << format_g17(*report.per_query_ndcg[q]);
      else
        out << "nan";
      out << '\n';
    }
  }
  return 0;
}

int cmd_cv(const std::string& dir, const PenaltyFlags& penalty_flags, const std::string& c_grid,
           int k, bool normalize, const std::string& out_dir, int threads) {
  ExperimentConfig config;
  try {
    config.folds = discover_folds(dir);
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  }
  config.penalty = penalty_flags.spec();
  if (!c_grid.empty()) config.c_grid = parse_c_grid(c_grid);
  config.ndcg_k = k;
  config.normalize = normalize;
  config.output_dir = out_dir;
  config.threads = threads;

  ExperimentSummary summary;
  try {
    summary = run_experiment(config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad configuration: " << e.what() << '\n';
    return kExitBadFlags;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolverError;
  }
  write_experiment_outputs(summary, config);

  std::cout << "folds=" << summary.per_fold.size() << '\n';
  std::cout << "mean_map=" << format_g17(summary.mean_map) << '\n';
  std::cout << "mean_ndcg@" << k << "=" << format_g17(summary.mean_ndcg) << '\n';
  std::cout << "mean_sparsity_ratio=" << format_g17(summary.mean_sparsity_ratio) << '\n';
  std::cout << "outputs written to " << out_dir << '\n';
  return 0;
}

MethodMetrics read_method_dir(const std::string& dir) {
  MethodMetrics metrics;
  metrics.name = fs::path(dir).filename().string();
  if (metrics.name.empty()) metrics.name = dir;

  std::ifstream in(fs::path(dir) / "per_query.csv");
  if (!in) throw std::runtime_error("cannot open '" + dir + "/per_query.csv'");
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string fold, qid, ap, ndcg;
    if (!std::getline(row, fold, ',') || !std::getline(row, qid, ',') ||
        !std::getline(row, ap, ',') || !std::getline(row, ndcg))
      throw std::runtime_error("malformed row in '" + dir + "/per_query.csv': " + line);
    metrics.per_query_ap.push_back(std::stod(ap));
    metrics.per_query_ndcg.push_back(ndcg == "nan" ? std::nan("") : std::stod(ndcg));
  }
  return metrics;
}

int cmd_compare(const std::vector<std::string>& dirs) {
  std::vector<MethodMetrics> methods;
  try {
    for (const auto& dir : dirs) methods.push_back(read_method_dir(dir));
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  }

  ComparisonTable table;
  try {
    table = compare_methods(methods);
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  }

  const auto print_rows = [](const char* metric, const std::string& best,
                             const std::vector<MethodComparison>& rows) {
    std::cout << metric << " best=" << best << '\n';
    for (const auto& row : rows) {
      std::cout << "  " << row.name << ": ";
      if (row.is_best)
        std::cout << "best";
      else if (row.equivalent)
        std::cout << "~ (p=" << format_g17(row.p_value) << ")";
      else
        std::cout << "-" << format_g17(row.percent_decrease) << "% (p=" << format_g17(row.p_value)
                  << ")";
      std::cout << '\n';
    }
  };
  print_rows("MAP", table.best_map_method, table.map_rows);
  print_rows("NDCG", table.best_ndcg_method, table.ndcg_rows);
  return 0;
}

int cmd_synth(const SynthConfig& config, const std::string& out_dir) {
  try {
    config.validate();
    generate_synthetic_corpus(config, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad configuration: " << e.what() << '\n';
    return kExitBadFlags;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  }
  std::cout << "wrote " << config.folds << " folds under " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse pairwise ranking SVM: training, evaluation and cross-validation"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train one model on a LETOR file");
  std::string train_data, train_out;
  double train_c = 1.0;
  bool train_normalize = false;
  PenaltyFlags train_penalty;
  train->add_option("--data", train_data, "LETOR training file")->required();
  train->add_option("--c", train_c, "Loss weight C (lambda = 1/C)")->required();
  train->add_option("--out", train_out, "Model output path (JSON)");
  train->add_flag("--normalize", train_normalize, "Per-query min-max feature scaling");
  train_penalty.attach(train);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a LETOR file");
  std::string eval_model, eval_data, eval_out;
  int eval_k = 10;
  bool eval_normalize = false;
  eval->add_option("--model", eval_model, "Model file (JSON)")->required();
  eval->add_option("--data", eval_data, "LETOR evaluation file")->required();
  eval->add_option("--k", eval_k, "NDCG cutoff");
  eval->add_option("--out", eval_out, "Per-query CSV output path");
  eval->add_flag("--normalize", eval_normalize, "Per-query min-max feature scaling");

  // cv
  auto* cv = app.add_subcommand("cv", "Cross-validated C-grid experiment over Fold1..FoldN");
  std::string cv_dir, cv_grid, cv_out = "cv_out";
  int cv_k = 10, cv_threads = default_threads();
  bool cv_normalize = false;
  PenaltyFlags cv_penalty;
  cv->add_option("--dir", cv_dir, "Dataset directory with Fold1..FoldN/{train,vali,test}.txt")->required();
  cv->add_option("--c-grid", cv_grid, "Comma-separated C grid (default 1e-4..1e4)");
  cv->add_option("--k", cv_k, "NDCG cutoff");
  cv->add_option("--out", cv_out, "Output directory");
  cv->add_option("--threads", cv_threads, "Fold-level parallelism (env RANKSVM_THREADS)");
  cv->add_flag("--normalize", cv_normalize, "Per-query min-max feature scaling");
  cv_penalty.attach(cv);

  // compare
  auto* compare = app.add_subcommand("compare", "Compare cv output directories");
  std::vector<std::string> compare_dirs;
  compare->add_option("dirs", compare_dirs, "Two or more cv output directories")
      ->required()
      ->expected(2, -1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic LETOR corpus");
  SynthConfig synth_config;
  std::string synth_out = "synth_out";
  synth->add_option("--queries", synth_config.queries, "Total number of queries")->required();
  synth->add_option("--docs-per-query", synth_config.docs_per_query, "Documents per query")->required();
  synth->add_option("--dim", synth_config.dim, "Feature dimension")->required();
  synth->add_option("--informative", synth_config.informative, "Planted support size")->required();
  synth->add_option("--seed", synth_config.seed, "RNG seed")->required();
  synth->add_option("--noise", synth_config.noise, "Score noise standard deviation");
  synth->add_option("--folds", synth_config.folds, "Number of folds");
  synth->add_option("--out", synth_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadFlags;
  }

  if (train->parsed()) {
    echo_config(*train);
    return cmd_train(train_data, train_penalty, train_c, train_normalize, train_out);
  }
  if (eval->parsed()) {
    echo_config(*eval);
    return cmd_eval(eval_model, eval_data, eval_k, eval_normalize, eval_out);
  }
  if (cv->parsed()) {
    echo_config(*cv);
    return cmd_cv(cv_dir, cv_penalty, cv_grid, cv_k, cv_normalize, cv_out, cv_threads);
  }
  if (compare->parsed()) {
    echo_config(*compare);
    return cmd_compare(compare_dirs);
  }
  if (synth->parsed()) {
    echo_config(*synth);
    return cmd_synth(synth_config, synth_out);
  }
  return kExitBadFlags;
}
