#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ranksvm/letor.hpp"
#include "ranksvm/metrics.hpp"
#include "ranksvm/penalties.hpp"
#include "ranksvm/solver.hpp"

namespace ranksvm {

struct ExperimentConfig {
  std::vector<FoldSpec> folds;
  std::vector<double> c_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1, 10, 100, 1000, 10000};
  PenaltySpec penalty;  // template; lambda is rebound per grid point
  SolverConfig solver;
  int ndcg_k = 10;
  bool normalize = false;
  std::string output_dir;
  unsigned long long seed = 0;  // reserved for synthetic generators
  int threads = 1;

  void validate() const;  // throws std::invalid_argument
};

struct FoldOutcome {
  double chosen_c = 0.0;
  double validation_map = 0.0;
  EvalReport test_report;
  FitResult fit;
  std::vector<std::int64_t> test_query_ids;  // aligned with test_report per-query lists
};

struct ExperimentSummary {
  std::vector<FoldOutcome> per_fold;
  double mean_map = 0.0;
  double mean_ndcg = 0.0;
  double mean_sparsity_ratio = 0.0;
};

/// Loader hook so tests can observe file access order; defaults to
/// parse_letor_file.
using DatasetLoader = std::function<Dataset(const std::string&)>;

/// Trains one model per C on the training split, picks the C with the best
/// validation MAP (ties: smallest C), then evaluates the already-trained
/// winner on the test split. Test data is loaded only after the choice is
/// fixed.
FoldOutcome run_fold(const FoldSpec& fold, const ExperimentConfig& config,
                     const DatasetLoader& loader = {});

ExperimentSummary run_experiment(const ExperimentConfig& config, const DatasetLoader& loader = {});

/// Per-query metric table for one method, pooled across all folds' test sets.
struct MethodMetrics {
  std::string name;
  std::vector<double> per_query_ap;
  std::vector<double> per_query_ndcg;  // NaN for queries skipped by NDCG
  double mean_sparsity_ratio = 0.0;
};

struct MethodComparison {
  std::string name;
  bool is_best = false;
  bool equivalent = false;      // p >= 0.05 against the best
  double percent_decrease = 0;  // 100 * (best - other) / best
  double p_value = 1.0;
};

struct ComparisonTable {
  std::string best_map_method;
  std::string best_ndcg_method;
  std::vector<MethodComparison> map_rows;
  std::vector<MethodComparison> ndcg_rows;
};

/// Identifies the best method by mean metric and tests every other method
/// against it with the paired one-sided Student test. Requires identical
/// query sets. Throws std::invalid_argument on mismatched table sizes.
ComparisonTable compare_methods(const std::vector<MethodMetrics>& methods);

/// Evaluates one model on a dataset: ranks each query by descending score
/// (stable ties) and computes AP / NDCG@k per query plus the sparsity ratio
/// against `active` features.
EvalReport evaluate_model(const Eigen::VectorXd& weights, const Dataset& dataset, int k,
                          int active_features);

/// Experiment output files: summary.json, per_fold.csv, per_query.csv and
/// model_fold<N>.json under config.output_dir. Numbers are printed with 17
/// significant digits.
void write_experiment_outputs(const ExperimentSummary& summary, const ExperimentConfig& config);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_g17(double x);

/// Discovers Fold1..FoldN/{train,vali,test}.txt under dir.
std::vector<FoldSpec> discover_folds(const std::string& dir);

}  // namespace ranksvm
