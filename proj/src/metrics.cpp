#include "ranksvm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace ranksvm {

bool is_relevant(int grade) { return grade >= 1; }

double precision_at_k(const QueryRanking& r, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), r.relevances.size());
  int hits = 0;
  for (std::size_t i = 0; i < top; ++i)
    if (is_relevant(r.relevances[i])) ++hits;
  return static_cast<double>(hits) / k;
}

double average_precision(const QueryRanking& r) {
  int total_relevant = 0;
  for (int grade : r.relevances)
    if (is_relevant(grade)) ++total_relevant;
  if (total_relevant == 0) return 0.0;
  double sum = 0;
  int hits = 0;
  for (std::size_t i = 0; i < r.relevances.size(); ++i) {
    if (is_relevant(r.relevances[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / total_relevant;
}

double mean_average_precision(const std::vector<QueryRanking>& rankings) {
  if (rankings.empty()) throw std::invalid_argument("no rankings");
  double sum = 0;
  for (const auto& r : rankings) sum += average_precision(r);
  return sum / static_cast<double>(rankings.size());
}

namespace {

double dcg_at_k(const std::vector<int>& grades, int k) {
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), grades.size());
  double dcg = 0;
  for (std::size_t i = 0; i < top; ++i)
    dcg += (std::exp2(grades[i]) - 1.0) / std::log2(static_cast<double>(i + 2));
  return dcg;
}

}  // namespace

std::optional<double> ndcg_at_k(const QueryRanking& r, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<int> ideal = r.relevances;
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());
  const double z = dcg_at_k(ideal, k);
  if (z == 0) return std::nullopt;
  return dcg_at_k(r.relevances, k) / z;
}

double mean_ndcg_at_k(const std::vector<QueryRanking>& rankings, int k) {
  double sum = 0;
  std::size_t counted = 0;
  for (const auto& r : rankings) {
    if (auto v = ndcg_at_k(r, k)) {
      sum += *v;
      ++counted;
    }
  }
  return counted ? sum / static_cast<double>(counted) : 0.0;
}

double sparsity_ratio(int nonzero, int active) {
  if (active <= 0) throw std::invalid_argument("no active features");
  if (nonzero < 0 || nonzero > active) throw std::invalid_argument("nonzero out of range");
  return static_cast<double>(nonzero) / static_cast<double>(active);
}

TTestResult paired_one_sided_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("need at least 2 pairs");

  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  if (sd == 0) {
    // constant differences: declared degenerate rules
    if (mean == 0) return {0.0, 1.0};
    return mean < 0 ? TTestResult{-std::numeric_limits<double>::infinity(), 0.0}
                    : TTestResult{std::numeric_limits<double>::infinity(), 1.0};
  }

  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  return {t, boost::math::cdf(dist, t)};
}

}  // namespace ranksvm
