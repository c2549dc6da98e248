#include <doctest.h>

#include <cmath>
#include <random>

#include "ranksvm/letor.hpp"
#include "ranksvm/penalties.hpp"
#include "ranksvm/solver.hpp"

using namespace ranksvm;

namespace {

struct Instance {
  Dataset dataset;
  PreferencePairs pairs;
};

Instance random_instance(std::mt19937& rng, int queries, int docs, int dim) {
  std::uniform_real_distribution<double> value(-1, 1);
  std::uniform_int_distribution<int> grade(0, 2);
  std::vector<Sample> samples;
  for (int q = 0; q < queries; ++q) {
    int seen_grades = 0;
    for (int doc = 0; doc < docs; ++doc) {
      Sample s;
      s.query_id = q + 1;
      // force at least one 0 and one >0 grade per query so pairs exist
      s.relevance = doc == 0 ? 0 : (doc == 1 ? 1 + seen_grades % 2 : grade(rng));
      ++seen_grades;
      s.features = Eigen::VectorXd::NullaryExpr(dim, [&](Eigen::Index) { return value(rng); });
      samples.push_back(std::move(s));
    }
  }
  Instance inst{Dataset(std::move(samples), dim), {}};
  inst.pairs = build_preference_pairs(inst.dataset);
  return inst;
}

Eigen::VectorXd random_vector(std::mt19937& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> gauss(0, scale);
  return Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
}

// plain ISTA reference run to a tight tolerance; deliberately shares nothing
// with fista_solve beyond the prox and gradient definitions
Eigen::VectorXd ista_reference(const Instance& inst, double lambda, int max_iters) {
  double sum_norms = 0;
  for (std::size_t p = 0; p < inst.pairs.count(); ++p)
    sum_norms += pair_difference(inst.pairs, inst.dataset, p).squaredNorm();
  const double L = 2.0 * sum_norms;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(inst.dataset.dimension());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(inst.dataset.dimension());
  for (int k = 0; k < max_iters; ++k) {
    const Eigen::VectorXd next = prox_weighted_l1(
        w - squared_hinge_gradient(inst.pairs, inst.dataset, w) / L, lambda / L, ones);
    const double step = (next - w).lpNorm<Eigen::Infinity>();
    w = next;
    if (step < 1e-13) break;
  }
  return w;
}

PenaltySpec l1_spec(double lambda) {
  PenaltySpec spec;
  spec.lambda = lambda;
  return spec;
}

}  // namespace

TEST_CASE("squared hinge loss basics") {
  const Dataset d = parse_letor_text("1 qid:1 1:1 2:0\n0 qid:1 1:0 2:0\n");
  const PreferencePairs pairs = build_preference_pairs(d);
  REQUIRE(pairs.count() == 1);  // xtilde = [1, 0]

  Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
  CHECK(squared_hinge_loss(pairs, d, w) == 1.0);
  w << 2, 0;
  CHECK(squared_hinge_loss(pairs, d, w) == 0.0);
  w << 0.5, 0;
  CHECK(squared_hinge_loss(pairs, d, w) == doctest::Approx(0.25));
  const Eigen::VectorXd grad = squared_hinge_gradient(pairs, d, w);
  CHECK(grad[0] == doctest::Approx(-1.0));
  CHECK(grad[1] == 0.0);
  w << 5, 0;
  CHECK(squared_hinge_gradient(pairs, d, w).isZero(0.0));
}

TEST_CASE("loss at zero equals pair count") {
  std::mt19937 rng(1);
  const Instance inst = random_instance(rng, 3, 6, 4);
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(4);
  CHECK(squared_hinge_loss(inst.pairs, inst.dataset, w) ==
        doctest::Approx(static_cast<double>(inst.pairs.count())));
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937 rng(2);
  const int dim = 20;
  const Instance inst = random_instance(rng, 5, 8, dim);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd w = random_vector(rng, dim, 0.5);
    const Eigen::VectorXd grad = squared_hinge_gradient(inst.pairs, inst.dataset, w);
    Eigen::VectorXd fd(dim);
    const double h = 1e-6;
    for (int j = 0; j < dim; ++j) {
      Eigen::VectorXd wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      fd[j] = (squared_hinge_loss(inst.pairs, inst.dataset, wp) -
               squared_hinge_loss(inst.pairs, inst.dataset, wm)) /
              (2 * h);
    }
    CHECK((grad - fd).norm() / std::max(1.0, fd.norm()) < 1e-6);
  }
}

TEST_CASE("lipschitz constant examples") {
  const Dataset d = parse_letor_text("1 qid:1 1:1 2:0\n0 qid:1 1:0 2:0\n");
  const PreferencePairs pairs = build_preference_pairs(d);
  CHECK(lipschitz_constant(pairs, d, LipschitzMode::SumNorms) == doctest::Approx(2.0));

  const Dataset d2 = parse_letor_text(
      "1 qid:1 1:1 2:0\n0 qid:1 1:0 2:0\n"
      "1 qid:2 1:1 2:0\n0 qid:2 1:0 2:0\n");
  const PreferencePairs pairs2 = build_preference_pairs(d2);
  CHECK(lipschitz_constant(pairs2, d2, LipschitzMode::SumNorms) == doctest::Approx(4.0));
  CHECK(lipschitz_constant(pairs2, d2, LipschitzMode::Spectral) == doctest::Approx(4.0));
}

TEST_CASE("spectral bound is tighter but still valid") {
  std::mt19937 rng(3);
  const Instance inst = random_instance(rng, 4, 8, 10);
  const double sum = lipschitz_constant(inst.pairs, inst.dataset, LipschitzMode::SumNorms);
  const double spec = lipschitz_constant(inst.pairs, inst.dataset, LipschitzMode::Spectral);
  CHECK(spec <= sum * (1 + 1e-10));
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd w1 = random_vector(rng, 10), w2 = random_vector(rng, 10);
    const double num = (squared_hinge_gradient(inst.pairs, inst.dataset, w1) -
                        squared_hinge_gradient(inst.pairs, inst.dataset, w2))
                           .norm();
    CHECK(num <= spec * (w1 - w2).norm() * (1 + 1e-9));
  }
}

TEST_CASE("objective decomposes into loss plus penalty") {
  std::mt19937 rng(4);
  const Instance inst = random_instance(rng, 3, 5, 6);
  const PenaltySpec spec = l1_spec(0.7);
  const Eigen::VectorXd w = random_vector(rng, 6);
  CHECK(objective(inst.pairs, inst.dataset, spec, w) ==
        doctest::Approx(squared_hinge_loss(inst.pairs, inst.dataset, w) +
                        0.7 * penalty_value(spec, w)));
}

TEST_CASE("objective on a hand-scripted 3-pair instance") {
  // query with grades 2,1,0 on 1-D features 3,2,1: pairs (0,1),(0,2),(1,2)
  // with differences 1,2,1
  const Dataset d = parse_letor_text("2 qid:1 1:3\n1 qid:1 1:2\n0 qid:1 1:1\n");
  const PreferencePairs pairs = build_preference_pairs(d);
  REQUIRE(pairs.count() == 3);
  Eigen::VectorXd w(1);
  w << 0.5;
  // margins 0.5, 1.0, 0.5 -> hinges 0.5, 0, 0.5 -> loss 0.5; penalty 0.5
  const PenaltySpec spec = l1_spec(2.0);
  CHECK(objective(pairs, d, spec, w) == doctest::Approx(0.5 + 2.0 * 0.5));
}

TEST_CASE("huge lambda shrinks everything to zero") {
  std::mt19937 rng(5);
  const Instance inst = random_instance(rng, 3, 5, 6);
  SolverConfig config;
  config.c = 1e-9;  // lambda = 1e9
  const FitResult fit = fista_solve(inst.pairs, inst.dataset, l1_spec(config.lambda()), config);
  CHECK(fit.weights.isZero(0.0));
  CHECK(fit.nonzero_count == 0);
}

TEST_CASE("fista matches a tight ISTA reference") {
  std::mt19937 rng(6);
  const Instance inst = random_instance(rng, 5, 8, 20);
  SolverConfig config;
  config.c = 1.0;
  config.inner_tol = 1e-11;
  const FitResult fit = fista_solve(inst.pairs, inst.dataset, l1_spec(1.0), config);
  const Eigen::VectorXd w_ista = ista_reference(inst, 1.0, 300000);
  const PenaltySpec spec = l1_spec(1.0);
  const double f_fista = objective(inst.pairs, inst.dataset, spec, fit.weights);
  const double f_ista = objective(inst.pairs, inst.dataset, spec, w_ista);
  CHECK(std::abs(f_fista - f_ista) / std::max(1.0, std::abs(f_ista)) < 1e-6);
}

TEST_CASE("fista fixed point at convergence") {
  std::mt19937 rng(7);
  const Instance inst = random_instance(rng, 4, 6, 10);
  SolverConfig config;
  config.c = 1.0;
  const FitResult fit = fista_solve(inst.pairs, inst.dataset, l1_spec(1.0), config);
  REQUIRE(fit.converged);
  const double L = lipschitz_constant(inst.pairs, inst.dataset, config.lipschitz_mode);
  const Eigen::VectorXd step = prox_weighted_l1(
      fit.weights - squared_hinge_gradient(inst.pairs, inst.dataset, fit.weights) / L, 1.0 / L,
      Eigen::VectorXd::Ones(10));
  CHECK((step - fit.weights).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("weighted l1 with a huge weight pins that coordinate to zero") {
  std::mt19937 rng(8);
  const Instance inst = random_instance(rng, 4, 6, 6);
  PenaltySpec spec;
  spec.kind = PenaltyKind::WeightedL1;
  spec.beta = Eigen::VectorXd::Ones(6);
  spec.beta[2] = 1e9;
  SolverConfig config;
  config.c = 10.0;
  const FitResult fit = fista_solve(inst.pairs, inst.dataset, spec, config);
  CHECK(fit.weights[2] == 0.0);
}

TEST_CASE("zero-threshold soundness: reported zeros are exact zeros") {
  std::mt19937 rng(9);
  const Instance inst = random_instance(rng, 4, 6, 10);
  SolverConfig config;
  config.c = 0.05;
  const FitResult fit = fista_solve(inst.pairs, inst.dataset, l1_spec(config.lambda()), config);
  int exact_nonzero = 0;
  for (Eigen::Index j = 0; j < fit.weights.size(); ++j)
    if (fit.weights[j] != 0.0) ++exact_nonzero;
  CHECK(fit.nonzero_count == exact_nonzero);
}

TEST_CASE("regularization path is monotone in the support size") {
  std::mt19937 rng(10);
  const Instance inst = random_instance(rng, 6, 8, 12);
  SolverConfig config;
  int prev_nnz = 0;
  for (double c : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
    config.c = c;
    const FitResult fit = fista_solve(inst.pairs, inst.dataset, l1_spec(config.lambda()), config);
    CHECK(fit.nonzero_count + 1 >= prev_nnz);  // one-feature slack for solver noise
    prev_nnz = fit.nonzero_count;
  }
}

TEST_CASE("constant reweight equals a single l1 solve") {
  std::mt19937 rng(11);
  const Instance inst = random_instance(rng, 4, 6, 8);
  SolverConfig config;
  config.c = 1.0;
  PenaltySpec wl1;
  wl1.kind = PenaltyKind::WeightedL1;
  wl1.beta = Eigen::VectorXd::Ones(8);
  const FitResult a = fista_solve(inst.pairs, inst.dataset, l1_spec(1.0), config);
  const FitResult b = fista_solve(inst.pairs, inst.dataset, wl1, config);
  CHECK((a.weights - b.weights).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("mcp with huge gamma matches the l1 solution") {
  std::mt19937 rng(12);
  const Instance inst = random_instance(rng, 4, 6, 8);
  SolverConfig config;
  config.c = 1.0;
  PenaltySpec mcp;
  mcp.kind = PenaltyKind::Mcp;
  mcp.gamma = 1e9;
  const FitResult a = fista_solve(inst.pairs, inst.dataset, l1_spec(1.0), config);
  const FitResult b = reweighted_solve(inst.pairs, inst.dataset, mcp, config);
  CHECK((a.weights - b.weights).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("outer MM iterations never increase the true objective") {
  std::mt19937 rng(13);
  const Instance inst = random_instance(rng, 5, 8, 10);
  SolverConfig config;
  config.c = 1.0;
  for (PenaltyKind kind : {PenaltyKind::Lp, PenaltyKind::Log, PenaltyKind::Mcp}) {
    PenaltySpec spec;
    spec.kind = kind;
    spec.p = 0.5;
    spec.epsilon = 0.1;
    spec.gamma = 2;
    const FitResult fit = reweighted_solve(inst.pairs, inst.dataset, spec, config);
    REQUIRE(fit.objective_trace.size() >= 1);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
      CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-8);
    // warm-start consistency: final no worse than the pure-l1 first iterate
    CHECK(fit.objective_trace.back() <= fit.objective_trace.front() + 1e-8);
  }
}

TEST_CASE("log penalty support is no larger than l1 at matched lambda") {
  std::mt19937 rng(14);
  // planted 5-feature signal in 50 dims
  std::vector<Sample> samples;
  Eigen::VectorXd w_star = Eigen::VectorXd::Zero(50);
  for (int j = 0; j < 5; ++j) w_star[j] = (j % 2 ? -1.0 : 1.0);
  std::uniform_real_distribution<double> value(-1, 1);
  for (int q = 0; q < 10; ++q) {
    std::vector<std::pair<double, Eigen::VectorXd>> docs;
    for (int doc = 0; doc < 10; ++doc) {
      Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(50, [&](Eigen::Index) { return value(rng); });
      docs.emplace_back(w_star.dot(x), std::move(x));
    }
    std::sort(docs.begin(), docs.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; r < docs.size(); ++r) {
      Sample s;
      s.query_id = q + 1;
      s.relevance = r < 2 ? 2 : (r < 5 ? 1 : 0);
      s.features = std::move(docs[r].second);
      samples.push_back(std::move(s));
    }
  }
  Instance inst{Dataset(std::move(samples), 50), {}};
  inst.pairs = build_preference_pairs(inst.dataset);

  SolverConfig config;
  config.c = 1.0;
  PenaltySpec lg;
  lg.kind = PenaltyKind::Log;
  lg.epsilon = 0.1;
  const FitResult f_l1 = fista_solve(inst.pairs, inst.dataset, l1_spec(1.0), config);
  const FitResult f_log = reweighted_solve(inst.pairs, inst.dataset, lg, config);
  CHECK(f_log.nonzero_count <= f_l1.nonzero_count);
}

TEST_CASE("predict scores") {
  const Dataset d = parse_letor_text("1 qid:1 1:1 2:5\n0 qid:1 1:2 2:7\n");
  CHECK(predict_scores(Eigen::VectorXd::Zero(2), d).isZero(0.0));
  Eigen::VectorXd e2(2);
  e2 << 0, 1;
  const Eigen::VectorXd s = predict_scores(e2, d);
  CHECK(s[0] == 5.0);
  CHECK(s[1] == 7.0);
  CHECK_THROWS_AS(predict_scores(Eigen::VectorXd::Zero(3), d), std::invalid_argument);
}

TEST_CASE("score ordering matches brute-force dot products") {
  std::mt19937 rng(15);
  const Instance inst = random_instance(rng, 3, 6, 5);
  const Eigen::VectorXd w = random_vector(rng, 5);
  const Eigen::VectorXd scores = predict_scores(w, inst.dataset);
  for (std::size_t i = 0; i < inst.dataset.num_samples(); ++i)
    for (std::size_t j = 0; j < inst.dataset.num_samples(); ++j) {
      const double si = inst.dataset.feature_row(i).dot(w);
      const double sj = inst.dataset.feature_row(j).dot(w);
      CHECK((scores[static_cast<Eigen::Index>(i)] > scores[static_cast<Eigen::Index>(j)]) == (si > sj));
    }
}

TEST_CASE("model files round-trip exactly") {
  std::mt19937 rng(16);
  ModelFile model;
  model.weights = random_vector(rng, 12);
  model.weights[3] = 0.0;
  model.penalty.kind = PenaltyKind::Mcp;
  model.penalty.gamma = 2;
  model.penalty.lambda = 0.25;
  model.c = 4.0;
  model.converged = true;
  const ModelFile back = parse_model(serialize_model(model));
  CHECK(back.weights == model.weights);
  CHECK(back.penalty.kind == model.penalty.kind);
  CHECK(back.penalty.gamma == model.penalty.gamma);
  CHECK(back.penalty.lambda == model.penalty.lambda);
  CHECK(back.c == model.c);
  CHECK(back.converged == model.converged);
  CHECK(serialize_model(back) == serialize_model(model));
}
