#include "ranksvm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;

namespace ranksvm {

void ExperimentConfig::validate() const {
  if (folds.empty()) throw std::invalid_argument("no folds configured");
  if (c_grid.empty()) throw std::invalid_argument("empty C grid");
  for (std::size_t i = 0; i + 1 < c_grid.size(); ++i)
    if (!(c_grid[i] < c_grid[i + 1])) throw std::invalid_argument("C grid must be strictly increasing");
  for (double c : c_grid)
    if (!(c > 0)) throw std::invalid_argument("C values must be positive");
  if (ndcg_k < 1) throw std::invalid_argument("ndcg_k must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

EvalReport evaluate_model(const Eigen::VectorXd& weights, const Dataset& dataset, int k,
                          int active_features) {
  const Eigen::VectorXd scores = predict_scores(weights, dataset);
  EvalReport report;
  report.k = k;
  for (std::int64_t qid : dataset.query_order()) {
    const QueryRange range = dataset.query_range(qid);
    std::vector<std::size_t> order(range.size());
    std::iota(order.begin(), order.end(), range.begin);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
    });
    QueryRanking ranking;
    ranking.relevances.reserve(order.size());
    for (std::size_t i : order) ranking.relevances.push_back(dataset.relevance(i));
    report.per_query_ap.push_back(average_precision(ranking));
    report.per_query_ndcg.push_back(ndcg_at_k(ranking, k));
  }
  double ap_sum = 0;
  for (double ap : report.per_query_ap) ap_sum += ap;
  report.map = report.per_query_ap.empty() ? 0.0 : ap_sum / static_cast<double>(report.per_query_ap.size());
  double ndcg_sum = 0;
  std::size_t ndcg_count = 0;
  for (const auto& v : report.per_query_ndcg)
    if (v) {
      ndcg_sum += *v;
      ++ndcg_count;
    }
  report.mean_ndcg = ndcg_count ? ndcg_sum / static_cast<double>(ndcg_count) : 0.0;
  int nonzero = 0;
  for (Eigen::Index j = 0; j < weights.size(); ++j)
    if (std::abs(weights[j]) > kZeroThreshold) ++nonzero;
  report.nonzero_features = nonzero;
  report.active_features = active_features;
  report.sparsity_ratio = active_features > 0 ? sparsity_ratio(nonzero, active_features) : 0.0;
  return report;
}

namespace {

FitResult fit_for_c(const PreferencePairs& pairs, const Dataset& train, const PenaltySpec& penalty,
                    const SolverConfig& base, double c) {
  SolverConfig config = base;
  config.c = c;
  PenaltySpec spec = penalty;
  spec.lambda = config.lambda();
  return spec.is_convex() ? fista_solve(pairs, train, spec, config)
                          : reweighted_solve(pairs, train, spec, config);
}

double validation_map(const FitResult& fit, const Dataset& validation) {
  return evaluate_model(fit.weights, validation, 10, static_cast<int>(validation.dimension())).map;
}

}  // namespace

FoldOutcome run_fold(const FoldSpec& fold, const ExperimentConfig& config,
                     const DatasetLoader& loader_arg) {
  config.validate();
  const DatasetLoader loader = loader_arg ? loader_arg : DatasetLoader(parse_letor_file);

  Dataset train = loader(fold.train_path);
  Dataset validation = loader(fold.validation_path);
  if (config.normalize) {
    train = normalize_query_minmax(train);
    validation = normalize_query_minmax(validation);
  }
  const PreferencePairs pairs = build_preference_pairs(train);
  if (pairs.count() == 0) throw std::runtime_error("training split has no preference pairs");
  const int active = static_cast<int>(train.num_active_features());

  FoldOutcome outcome;
  bool any_fit = false;
  double best_map = -1;
  for (double c : config.c_grid) {
    FitResult fit;
    try {
      fit = fit_for_c(pairs, train, config.penalty, config.solver, c);
    } catch (const std::runtime_error&) {
      continue;  // pathological grid point; skip it
    }
    any_fit = true;
    const double vmap = validation_map(fit, validation);
    if (vmap > best_map) {  // ties keep the earlier (smaller) C
      best_map = vmap;
      outcome.chosen_c = c;
      outcome.validation_map = vmap;
      outcome.fit = std::move(fit);
    }
  }
  if (!any_fit) throw std::runtime_error("solver failed on every C grid point");

  // test data enters only after the choice of C is fixed
  Dataset test = loader(fold.test_path);
  if (config.normalize) test = normalize_query_minmax(test);
  outcome.test_report = evaluate_model(outcome.fit.weights, test, config.ndcg_k, active);
  outcome.test_query_ids = test.query_order();
  return outcome;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, const DatasetLoader& loader) {
  config.validate();
  ExperimentSummary summary;
  summary.per_fold.resize(config.folds.size());

  if (config.threads > 1 && config.folds.size() > 1) {
    std::vector<std::future<FoldOutcome>> futures;
    futures.reserve(config.folds.size());
    for (const auto& fold : config.folds)
      futures.push_back(std::async(std::launch::async,
                                   [&fold, &config, &loader] { return run_fold(fold, config, loader); }));
    for (std::size_t i = 0; i < futures.size(); ++i) summary.per_fold[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < config.folds.size(); ++i)
      summary.per_fold[i] = run_fold(config.folds[i], config, loader);
  }

  // sorted summation keeps the means invariant under fold-order permutation
  const auto sorted_mean = [&](auto metric_of) {
    std::vector<double> values;
    for (const auto& fold : summary.per_fold) values.push_back(metric_of(fold));
    std::sort(values.begin(), values.end());
    double sum = 0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  };
  summary.mean_map = sorted_mean([](const FoldOutcome& f) { return f.test_report.map; });
  summary.mean_ndcg = sorted_mean([](const FoldOutcome& f) { return f.test_report.mean_ndcg; });
  summary.mean_sparsity_ratio =
      sorted_mean([](const FoldOutcome& f) { return f.test_report.sparsity_ratio; });
  return summary;
}

ComparisonTable compare_methods(const std::vector<MethodMetrics>& methods) {
  if (methods.size() < 2) throw std::invalid_argument("need at least two methods");
  const std::size_t nq = methods.front().per_query_ap.size();
  for (const auto& m : methods)
    if (m.per_query_ap.size() != nq || m.per_query_ndcg.size() != nq)
      throw std::invalid_argument("methods evaluated on different query sets");

  auto mean_of = [](const std::vector<double>& v) {
    double sum = 0;
    std::size_t n = 0;
    for (double x : v)
      if (!std::isnan(x)) {
        sum += x;
        ++n;
      }
    return n ? sum / static_cast<double>(n) : 0.0;
  };

  auto build_rows = [&](auto metric_of, std::string& best_name) {
    std::size_t best = 0;
    double best_mean = -1;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const double m = mean_of(metric_of(methods[i]));
      if (m > best_mean) {
        best_mean = m;
        best = i;
      }
    }
    best_name = methods[best].name;

    std::vector<MethodComparison> rows;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      MethodComparison row;
      row.name = methods[i].name;
      if (i == best) {
        row.is_best = true;
        rows.push_back(row);
        continue;
      }
      // pair only queries where both methods have a value
      std::vector<double> other, best_vals;
      const auto& ov = metric_of(methods[i]);
      const auto& bv = metric_of(methods[best]);
      for (std::size_t q = 0; q < nq; ++q) {
        if (!std::isnan(ov[q]) && !std::isnan(bv[q])) {
          other.push_back(ov[q]);
          best_vals.push_back(bv[q]);
        }
      }
      const TTestResult test = paired_one_sided_t_test(other, best_vals);
      row.p_value = test.p_value;
      row.equivalent = test.p_value >= 0.05;
      if (!row.equivalent && best_mean > 0)
        row.percent_decrease = 100.0 * (best_mean - mean_of(ov)) / best_mean;
      rows.push_back(row);
    }
    return rows;
  };

  ComparisonTable table;
  table.map_rows = build_rows([](const MethodMetrics& m) -> const std::vector<double>& { return m.per_query_ap; },
                              table.best_map_method);
  table.ndcg_rows = build_rows([](const MethodMetrics& m) -> const std::vector<double>& { return m.per_query_ndcg; },
                               table.best_ndcg_method);
  return table;
}

void write_experiment_outputs(const ExperimentSummary& summary, const ExperimentConfig& config) {
  fs::create_directories(config.output_dir);
  const fs::path dir(config.output_dir);

  {
    nlohmann::ordered_json doc;
    doc["mean_map"] = format_g17(summary.mean_map);
    doc["mean_ndcg_at_k"] = format_g17(summary.mean_ndcg);
    doc["mean_sparsity_ratio"] = format_g17(summary.mean_sparsity_ratio);
    nlohmann::ordered_json cfg;
    cfg["penalty"] = to_string(config.penalty.kind);
    if (config.penalty.kind == PenaltyKind::Lp) cfg["p"] = format_g17(config.penalty.p);
    if (config.penalty.kind == PenaltyKind::Log) cfg["eps"] = format_g17(config.penalty.epsilon);
    if (config.penalty.kind == PenaltyKind::Mcp) cfg["gamma"] = format_g17(config.penalty.gamma);
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    for (double c : config.c_grid) grid.push_back(format_g17(c));
    cfg["c_grid"] = std::move(grid);
    cfg["ndcg_k"] = config.ndcg_k;
    cfg["normalize"] = config.normalize;
    cfg["folds"] = config.folds.size();
    cfg["seed"] = config.seed;
    doc["config"] = std::move(cfg);
    nlohmann::ordered_json per_fold = nlohmann::ordered_json::array();
    for (const auto& fold : summary.per_fold) {
      nlohmann::ordered_json f;
      f["chosen_c"] = format_g17(fold.chosen_c);
      f["validation_map"] = format_g17(fold.validation_map);
      f["test_map"] = format_g17(fold.test_report.map);
      f["test_ndcg_at_k"] = format_g17(fold.test_report.mean_ndcg);
      f["sparsity_ratio"] = format_g17(fold.test_report.sparsity_ratio);
      f["nonzero_features"] = fold.test_report.nonzero_features;
      f["active_features"] = fold.test_report.active_features;
      per_fold.push_back(std::move(f));
    }
    doc["per_fold"] = std::move(per_fold);
    std::ofstream out(dir / "summary.json");
    if (!out) throw std::runtime_error("cannot write summary.json");
    out << doc.dump(2) << "\n";
  }

  {
    std::ofstream out(dir / "per_fold.csv");
    out << "fold,chosen_c,validation_map,test_map,test_ndcg_at_k,sparsity_ratio,"
           "nonzero_features,active_features,inner_iterations,outer_iterations,converged\n";
    for (std::size_t i = 0; i < summary.per_fold.size(); ++i) {
      const auto& fold = summary.per_fold[i];
      out << (i + 1) << ',' << format_g17(fold.chosen_c) << ',' << format_g17(fold.validation_map)
          << ',' << format_g17(fold.test_report.map) << ',' << format_g17(fold.test_report.mean_ndcg)
          << ',' << format_g17(fold.test_report.sparsity_ratio) << ','
          << fold.test_report.nonzero_features << ',' << fold.test_report.active_features << ','
          << fold.fit.inner_iterations << ',' << fold.fit.outer_iterations << ','
          << (fold.fit.converged ? 1 : 0) << '\n';
    }
  }

  {
    std::ofstream out(dir / "per_query.csv");
    out << "fold,qid,ap,ndcg_at_k\n";
    for (std::size_t i = 0; i < summary.per_fold.size(); ++i) {
      const auto& fold = summary.per_fold[i];
      for (std::size_t q = 0; q < fold.test_query_ids.size(); ++q) {
        out << (i + 1) << ',' << fold.test_query_ids[q] << ','
            << format_g17(fold.test_report.per_query_ap[q]) << ',';
        if (fold.test_report.per_query_ndcg[q])
          out << format_g17(*fold.test_report.per_query_ndcg[q]);
        else
          out << "nan";
        out << '\n';
      }
    }
  }

  for (std::size_t i = 0; i < summary.per_fold.size(); ++i) {
    const auto& fold = summary.per_fold[i];
    ModelFile model;
    model.weights = fold.fit.weights;
    model.penalty = config.penalty;
    model.penalty.lambda = 1.0 / fold.chosen_c;
    model.c = fold.chosen_c;
    model.converged = fold.fit.converged;
    save_model(model, (dir / ("model_fold" + std::to_string(i + 1) + ".json")).string());
  }
}

std::vector<FoldSpec> discover_folds(const std::string& dir) {
  std::vector<FoldSpec> folds;
  for (int i = 1;; ++i) {
    const fs::path fold_dir = fs::path(dir) / ("Fold" + std::to_string(i));
    if (!fs::is_directory(fold_dir)) break;
    FoldSpec spec;
    spec.train_path = (fold_dir / "train.txt").string();
    spec.validation_path = (fold_dir / "vali.txt").string();
    spec.test_path = (fold_dir / "test.txt").string();
    for (const auto& path : {spec.train_path, spec.validation_path, spec.test_path})
      if (!fs::is_regular_file(path)) throw std::runtime_error("missing fold file '" + path + "'");
    folds.push_back(std::move(spec));
  }
  if (folds.empty()) throw std::runtime_error("no Fold1..FoldN directories under '" + dir + "'");
  return folds;
}

}  // namespace ranksvm
