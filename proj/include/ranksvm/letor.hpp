#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ranksvm {

/// One query-document sample: graded relevance, query id, feature vector.
struct Sample {
  int relevance = 0;
  std::int64_t query_id = 0;
  Eigen::VectorXd features;
  std::string doc_id;  // optional trailing comment tag, empty if absent
};

/// Contiguous index range [begin, end) into Dataset::samples.
struct QueryRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Query-grouped dataset. Feature rows are stored in a dense n x d matrix;
/// immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Sample> samples, Eigen::Index dimension);

  std::size_t num_samples() const { return static_cast<std::size_t>(features_.rows()); }
  Eigen::Index dimension() const { return features_.cols(); }
  std::size_t num_queries() const { return query_order_.size(); }

  const Eigen::MatrixXd& features() const { return features_; }
  Eigen::MatrixXd::ConstRowXpr feature_row(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)); }
  int relevance(std::size_t i) const { return relevances_[i]; }
  std::int64_t query_id(std::size_t i) const { return query_ids_[i]; }
  const std::string& doc_id(std::size_t i) const { return doc_ids_[i]; }

  /// Query ids in first-appearance order.
  const std::vector<std::int64_t>& query_order() const { return query_order_; }
  const QueryRange& query_range(std::int64_t qid) const { return query_index_.at(qid); }

  /// active_features[j] is false iff feature j is zero in every sample.
  const std::vector<bool>& active_features() const { return active_features_; }
  std::size_t num_active_features() const;

 private:
  Eigen::MatrixXd features_;  // n x d
  std::vector<int> relevances_;
  std::vector<std::int64_t> query_ids_;
  std::vector<std::string> doc_ids_;
  std::vector<std::int64_t> query_order_;
  std::map<std::int64_t, QueryRange> query_index_;
  std::vector<bool> active_features_;
};

/// Ordered same-query document pairs, winner (higher grade) first.
struct PreferencePairs {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::size_t count() const { return pairs.size(); }
};

/// Train/validation/test file locations for one cross-validation fold.
struct FoldSpec {
  std::string train_path;
  std::string validation_path;
  std::string test_path;
};

/// Parses a LETOR/SVMLight-style file:
///   REL qid:QID FID:VALUE ... [#comment]
/// Lines starting with '#' and blank lines are skipped. Feature ids must be
/// strictly increasing per line; missing ids default to 0. Throws
/// std::runtime_error with the offending line number on malformed input.
Dataset parse_letor_file(const std::string& path);

/// Parses LETOR-format text from a string (same grammar as parse_letor_file).
Dataset parse_letor_text(const std::string& text, const std::string& origin = "<string>");

/// Serializes a dataset back to LETOR text. parse(serialize(d)) == d.
std::string serialize_letor(const Dataset& dataset);

/// Emits one pair per same-query document pair with strictly different
/// grades, winner first. Queries with uniform relevance contribute nothing.
PreferencePairs build_preference_pairs(const Dataset& dataset);

/// Difference vector x_winner - x_loser for pair p.
Eigen::VectorXd pair_difference(const PreferencePairs& pairs, const Dataset& dataset, std::size_t p);

/// Matrix-free products with the P x d preference-difference matrix.
Eigen::VectorXd xtilde_apply(const PreferencePairs& pairs, const Dataset& dataset,
                             const Eigen::VectorXd& w);
Eigen::VectorXd xtilde_apply_transpose(const PreferencePairs& pairs, const Dataset& dataset,
                                       const Eigen::VectorXd& v);

/// Opt-in dense materialization of the preference-difference matrix.
/// Throws std::runtime_error when P*d exceeds max_entries.
Eigen::MatrixXd dense_differences(const PreferencePairs& pairs, const Dataset& dataset,
                                  std::size_t max_entries = std::size_t{1} << 26);

/// Per-query min-max rescaling of each feature to [0,1]; features constant
/// within a query map to 0.
Dataset normalize_query_minmax(const Dataset& dataset);

}  // namespace ranksvm
