#pragma once

#include <optional>
#include <vector>

namespace ranksvm {

/// Relevance grades of one query's documents ordered by descending model
/// score (ties broken by original document order).
struct QueryRanking {
  std::vector<int> relevances;
};

struct EvalReport {
  std::vector<double> per_query_ap;
  double map = 0.0;
  std::vector<std::optional<double>> per_query_ndcg;  // nullopt: no relevant docs
  double mean_ndcg = 0.0;
  int k = 10;
  double sparsity_ratio = 0.0;
  int nonzero_features = 0;
  int active_features = 0;
};

/// Grades >= 1 count as relevant for the binary metrics.
bool is_relevant(int grade);

/// Fraction of relevant documents among the top k positions (denominator k).
double precision_at_k(const QueryRanking& r, int k);

/// Sum of P@i over relevant positions i, divided by the number of relevant
/// documents; 0 when the query has none.
double average_precision(const QueryRanking& r);

double mean_average_precision(const std::vector<QueryRanking>& rankings);

/// DCG@k = sum (2^r(i) - 1)/log2(i+1) normalized by the ideal ordering at
/// the same cutoff. Empty when the query has no relevant document.
std::optional<double> ndcg_at_k(const QueryRanking& r, int k);

/// Mean NDCG@k over queries with at least one relevant document.
double mean_ndcg_at_k(const std::vector<QueryRanking>& rankings, int k);

/// nonzero / active, dead features excluded from the denominator.
double sparsity_ratio(int nonzero, int active);

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
};

/// Paired one-sided Student test of H1: mean(a - b) < 0. All-zero
/// differences give p = 1; zero variance with negative mean gives p = 0.
TTestResult paired_one_sided_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ranksvm
