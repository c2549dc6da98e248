#include <doctest.h>

#include <random>
#include <sstream>

#include "ranksvm/letor.hpp"

using namespace ranksvm;

namespace {

Dataset random_dataset(std::mt19937& rng, int queries, int docs, int dim) {
  std::uniform_real_distribution<double> value(-1, 1);
  std::uniform_int_distribution<int> grade(0, 2);
  std::vector<Sample> samples;
  for (int q = 0; q < queries; ++q) {
    for (int doc = 0; doc < docs; ++doc) {
      Sample s;
      s.query_id = q + 1;
      s.relevance = grade(rng);
      s.features = Eigen::VectorXd::NullaryExpr(dim, [&](Eigen::Index) { return value(rng); });
      samples.push_back(std::move(s));
    }
  }
  return Dataset(std::move(samples), dim);
}

}  // namespace

TEST_CASE("parse single line with comment") {
  const Dataset d = parse_letor_text("2 qid:10 1:0.5 2:0.3 #docid=A\n");
  REQUIRE(d.num_samples() == 1);
  CHECK(d.relevance(0) == 2);
  CHECK(d.query_id(0) == 10);
  CHECK(d.dimension() == 2);
  CHECK(d.feature_row(0)[0] == 0.5);
  CHECK(d.feature_row(0)[1] == 0.3);
  CHECK(d.doc_id(0) == "docid=A");
}

TEST_CASE("empty input gives empty dataset") {
  const Dataset d = parse_letor_text("");
  CHECK(d.num_samples() == 0);
  CHECK(d.num_queries() == 0);
}

TEST_CASE("comment lines and blank lines are skipped") {
  const Dataset d = parse_letor_text("# header\n\n1 qid:1 1:1.0\n");
  CHECK(d.num_samples() == 1);
}

TEST_CASE("missing feature ids default to zero") {
  const Dataset d = parse_letor_text("0 qid:1 2:4.0\n1 qid:1 1:1.0 3:2.0\n");
  CHECK(d.dimension() == 3);
  CHECK(d.feature_row(0)[0] == 0.0);
  CHECK(d.feature_row(0)[1] == 4.0);
  CHECK(d.feature_row(1)[2] == 2.0);
}

TEST_CASE("parse errors carry the line number") {
  CHECK_THROWS_WITH_AS(parse_letor_text("1 qid:1 1:1.0\nbroken\n"), doctest::Contains(":2:"),
                       std::runtime_error);
  CHECK_THROWS_AS(parse_letor_text("1 qid:1\n"), std::runtime_error);            // no features
  CHECK_THROWS_AS(parse_letor_text("1 qid:1 2:1.0 1:2.0\n"), std::runtime_error);  // not increasing
  CHECK_THROWS_AS(parse_letor_text("x qid:1 1:1.0\n"), std::runtime_error);
}

TEST_CASE("active feature mask") {
  const Dataset d = parse_letor_text("1 qid:1 1:1.0 3:0.0\n0 qid:1 1:2.0 3:0.0\n");
  CHECK(d.active_features() == std::vector<bool>{true, false, false});
  CHECK(d.num_active_features() == 1);
}

TEST_CASE("serialize then reparse round-trips") {
  std::mt19937 rng(7);
  const Dataset d = random_dataset(rng, 3, 4, 5);
  const Dataset d2 = parse_letor_text(serialize_letor(d));
  REQUIRE(d2.num_samples() == d.num_samples());
  CHECK(d2.features() == d.features());
  for (std::size_t i = 0; i < d.num_samples(); ++i) {
    CHECK(d2.relevance(i) == d.relevance(i));
    CHECK(d2.query_id(i) == d.query_id(i));
  }
  CHECK(serialize_letor(d2) == serialize_letor(d));
}

TEST_CASE("preference pairs across grades") {
  const Dataset d = parse_letor_text("2 qid:1 1:1\n1 qid:1 1:2\n0 qid:1 1:3\n");
  const PreferencePairs pairs = build_preference_pairs(d);
  REQUIRE(pairs.count() == 3);
  CHECK(pairs.pairs[0] == std::pair<std::uint32_t, std::uint32_t>{0, 1});
  CHECK(pairs.pairs[1] == std::pair<std::uint32_t, std::uint32_t>{0, 2});
  CHECK(pairs.pairs[2] == std::pair<std::uint32_t, std::uint32_t>{1, 2});
}

TEST_CASE("uniform relevance yields no pairs") {
  const Dataset d = parse_letor_text("1 qid:1 1:1\n1 qid:1 1:2\n1 qid:1 1:3\n");
  CHECK(build_preference_pairs(d).count() == 0);
}

TEST_CASE("no pairs across queries") {
  const Dataset d = parse_letor_text("2 qid:1 1:1\n0 qid:2 1:2\n");
  CHECK(build_preference_pairs(d).count() == 0);
}

TEST_CASE("pair count matches brute-force double loop") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = random_dataset(rng, 4, 6, 3);
    const PreferencePairs pairs = build_preference_pairs(d);
    std::size_t expected = 0;
    for (std::size_t s = 0; s < d.num_samples(); ++s)
      for (std::size_t t = 0; t < d.num_samples(); ++t)
        if (d.query_id(s) == d.query_id(t) && d.relevance(s) > d.relevance(t)) ++expected;
    CHECK(pairs.count() == expected);
    for (const auto& [s, t] : pairs.pairs) {
      CHECK(d.query_id(s) == d.query_id(t));
      CHECK(d.relevance(s) > d.relevance(t));
    }
  }
}

TEST_CASE("pair_difference matches explicit matrix row") {
  std::mt19937 rng(13);
  const Dataset d = random_dataset(rng, 3, 5, 4);
  const PreferencePairs pairs = build_preference_pairs(d);
  REQUIRE(pairs.count() > 0);
  const Eigen::MatrixXd dense = dense_differences(pairs, d);
  for (std::size_t p = 0; p < pairs.count(); ++p)
    CHECK(pair_difference(pairs, d, p) == dense.row(static_cast<Eigen::Index>(p)).transpose());
  CHECK_THROWS_AS(pair_difference(pairs, d, pairs.count()), std::out_of_range);
}

TEST_CASE("dense mode respects its entry budget") {
  std::mt19937 rng(17);
  const Dataset d = random_dataset(rng, 3, 5, 4);
  const PreferencePairs pairs = build_preference_pairs(d);
  CHECK_THROWS_AS(dense_differences(pairs, d, 1), std::runtime_error);
}

TEST_CASE("xtilde products match the dense matrix") {
  std::mt19937 rng(19);
  std::normal_distribution<double> gauss;
  const Dataset d = random_dataset(rng, 2, 6, 5);
  const PreferencePairs pairs = build_preference_pairs(d);
  REQUIRE(pairs.count() >= 10);
  const Eigen::MatrixXd dense = dense_differences(pairs, d);

  const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(5, [&](Eigen::Index) { return gauss(rng); });
  CHECK((xtilde_apply(pairs, d, w) - dense * w).norm() < 1e-12);

  const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(
      static_cast<Eigen::Index>(pairs.count()), [&](Eigen::Index) { return gauss(rng); });
  CHECK((xtilde_apply_transpose(pairs, d, v) - dense.transpose() * v).norm() < 1e-12);

  CHECK(xtilde_apply(pairs, d, Eigen::VectorXd::Zero(5)).isZero(0.0));
}

TEST_CASE("adjoint identity <Xw, v> == <w, X'v>") {
  std::mt19937 rng(23);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset d = random_dataset(rng, 3, 5, 6);
    const PreferencePairs pairs = build_preference_pairs(d);
    if (pairs.count() == 0) continue;
    const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(6, [&](Eigen::Index) { return gauss(rng); });
    const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(
        static_cast<Eigen::Index>(pairs.count()), [&](Eigen::Index) { return gauss(rng); });
    const double lhs = xtilde_apply(pairs, d, w).dot(v);
    const double rhs = w.dot(xtilde_apply_transpose(pairs, d, v));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("length mismatches are rejected") {
  const Dataset d = parse_letor_text("1 qid:1 1:1 2:2\n0 qid:1 1:3 2:4\n");
  const PreferencePairs pairs = build_preference_pairs(d);
  CHECK_THROWS_AS(xtilde_apply(pairs, d, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(xtilde_apply_transpose(pairs, d, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("per-query min-max normalization") {
  const Dataset d = parse_letor_text(
      "0 qid:1 1:2\n1 qid:1 1:4\n2 qid:1 1:6\n"
      "0 qid:2 1:5\n1 qid:2 1:5\n");
  const Dataset n = normalize_query_minmax(d);
  CHECK(n.feature_row(0)[0] == 0.0);
  CHECK(n.feature_row(1)[0] == 0.5);
  CHECK(n.feature_row(2)[0] == 1.0);
  // constant within query 2 maps to 0
  CHECK(n.feature_row(3)[0] == 0.0);
  CHECK(n.feature_row(4)[0] == 0.0);
}

TEST_CASE("queries are normalized independently") {
  std::mt19937 rng(29);
  const Dataset d = random_dataset(rng, 2, 5, 3);
  const Dataset n = normalize_query_minmax(d);
  for (std::int64_t qid : d.query_order()) {
    const QueryRange range = d.query_range(qid);
    for (Eigen::Index j = 0; j < d.dimension(); ++j) {
      double lo = d.feature_row(range.begin)[j], hi = lo;
      for (std::size_t i = range.begin; i < range.end; ++i) {
        lo = std::min(lo, d.feature_row(i)[j]);
        hi = std::max(hi, d.feature_row(i)[j]);
      }
      for (std::size_t i = range.begin; i < range.end; ++i) {
        const double expected = hi > lo ? (d.feature_row(i)[j] - lo) / (hi - lo) : 0.0;
        CHECK(n.feature_row(i)[j] == doctest::Approx(expected).epsilon(1e-14));
      }
    }
  }
}
