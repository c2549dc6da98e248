#include "ranksvm/solver.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ranksvm {

double squared_hinge_loss(const PreferencePairs& pairs, const Dataset& dataset,
                          const Eigen::VectorXd& w) {
  const Eigen::VectorXd margins = xtilde_apply(pairs, dataset, w);
  double total = 0;
  for (Eigen::Index p = 0; p < margins.size(); ++p) {
    const double h = 1.0 - margins[p];
    if (h > 0) total += h * h;
  }
  return total;
}

Eigen::VectorXd squared_hinge_gradient(const PreferencePairs& pairs, const Dataset& dataset,
                                       const Eigen::VectorXd& w) {
  const Eigen::VectorXd scores = dataset.features() * w;
  // accumulate per-document hinge coefficients, then one d-dimensional product
  Eigen::VectorXd doc_coeff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dataset.num_samples()));
  for (std::size_t p = 0; p < pairs.count(); ++p) {
    const auto [s, t] = pairs.pairs[p];
    const double h = 1.0 - (scores[static_cast<Eigen::Index>(s)] - scores[static_cast<Eigen::Index>(t)]);
    if (h > 0) {
      doc_coeff[static_cast<Eigen::Index>(s)] += h;
      doc_coeff[static_cast<Eigen::Index>(t)] -= h;
    }
  }
  return -2.0 * (dataset.features().transpose() * doc_coeff);
}

double lipschitz_constant(const PreferencePairs& pairs, const Dataset& dataset, LipschitzMode mode) {
  if (pairs.count() == 0) throw std::invalid_argument("no preference pairs");
  if (mode == LipschitzMode::SumNorms) {
    double total = 0;
    for (std::size_t p = 0; p < pairs.count(); ++p)
      total += pair_difference(pairs, dataset, p).squaredNorm();
    return 2.0 * total;
  }
  // power iteration on w -> Xtilde' (Xtilde w)
  const Eigen::Index d = dataset.dimension();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(d).normalized();
  double eig = 0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd u = xtilde_apply_transpose(pairs, dataset, xtilde_apply(pairs, dataset, v));
    const double norm = u.norm();
    if (norm == 0) return 2.0 * 1e-300;  // Xtilde is zero; any tiny L works
    u /= norm;
    const double next = norm;
    const bool settled = std::abs(next - eig) <= 1e-12 * std::max(1.0, next);
    eig = next;
    v = u;
    if (settled && it > 2) break;
  }
  return 2.0 * eig;
}

double objective(const PreferencePairs& pairs, const Dataset& dataset, const PenaltySpec& spec,
                 const Eigen::VectorXd& w) {
  return squared_hinge_loss(pairs, dataset, w) + spec.lambda * penalty_value(spec, w);
}

namespace {

int count_nonzeros(const Eigen::VectorXd& w) {
  int n = 0;
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (std::abs(w[j]) > kZeroThreshold) ++n;
  return n;
}

}  // namespace

FitResult fista_solve(const PreferencePairs& pairs, const Dataset& dataset, const PenaltySpec& spec,
                      const SolverConfig& config, const Eigen::VectorXd* w0) {
  if (!spec.is_convex())
    throw std::invalid_argument("fista_solve handles l1 / weighted-l1 only");
  spec.validate();
  const Eigen::Index d = dataset.dimension();
  const double lambda = config.lambda();
  const double L = lipschitz_constant(pairs, dataset, config.lipschitz_mode);
  const Eigen::VectorXd beta = spec.kind == PenaltyKind::WeightedL1
                                   ? spec.beta
                                   : Eigen::VectorXd::Ones(d);

  PenaltySpec eval_spec = spec;
  eval_spec.lambda = lambda;

  FitResult result;
  Eigen::VectorXd w = w0 ? *w0 : Eigen::VectorXd::Zero(d);
  Eigen::VectorXd w_prev = w;
  Eigen::VectorXd z = w;
  double t = 1.0;

  double obj = objective(pairs, dataset, eval_spec, w);
  result.objective_trace.push_back(obj);
  int small_changes = 0;

  int k = 0;
  for (; k < config.inner_max_iter; ++k) {
    const Eigen::VectorXd grad = squared_hinge_gradient(pairs, dataset, z);
    const Eigen::VectorXd w_next = prox_weighted_l1(z - grad / L, lambda / L, beta);
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    z = w_next + ((t - 1.0) / t_next) * (w_next - w);
    w_prev = w;
    w = w_next;
    t = t_next;

    const double obj_next = objective(pairs, dataset, eval_spec, w);
    if (!std::isfinite(obj_next))
      throw std::runtime_error("non-finite objective; check data scaling");
    result.objective_trace.push_back(obj_next);

    const double rel_change = std::abs(obj - obj_next) / std::max(1.0, std::abs(obj));
    obj = obj_next;
    if (rel_change < config.inner_tol) {
      if (++small_changes >= config.inner_tol_patience) {
        result.converged = true;
        ++k;
        break;
      }
    } else {
      small_changes = 0;
    }
  }

  result.weights = std::move(w);
  result.inner_iterations = k;
  result.outer_iterations = 0;
  result.nonzero_count = count_nonzeros(result.weights);
  return result;
}

FitResult reweighted_solve(const PreferencePairs& pairs, const Dataset& dataset,
                           const PenaltySpec& spec, const SolverConfig& config) {
  if (spec.is_convex())
    throw std::invalid_argument("reweighted_solve handles lp / log / mcp only");
  PenaltySpec bound = spec;
  bound.lambda = config.lambda();
  bound.validate();

  const Eigen::Index d = dataset.dimension();
  PenaltySpec inner = bound;
  inner.kind = PenaltyKind::WeightedL1;
  inner.beta = Eigen::VectorXd::Ones(d);

  FitResult result;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  int total_inner = 0;
  int outer = 0;
  bool outer_converged = false;

  for (; outer < config.outer_max_iter; ++outer) {
    const FitResult sub = fista_solve(pairs, dataset, inner, config, &w);
    total_inner += sub.inner_iterations;
    const double step = (sub.weights - w).lpNorm<Eigen::Infinity>();
    w = sub.weights;
    result.objective_trace.push_back(objective(pairs, dataset, bound, w));
    inner.beta = reweight(bound, w);
    if (step < config.outer_tol) {
      outer_converged = true;
      ++outer;
      break;
    }
  }

  result.weights = std::move(w);
  result.inner_iterations = total_inner;
  result.outer_iterations = outer;
  result.converged = outer_converged;
  result.nonzero_count = count_nonzeros(result.weights);
  return result;
}

Eigen::VectorXd predict_scores(const Eigen::VectorXd& weights, const Dataset& dataset) {
  if (weights.size() != dataset.dimension())
    throw std::invalid_argument("model dimension does not match dataset");
  return dataset.features() * weights;
}

std::string serialize_model(const ModelFile& model) {
  nlohmann::ordered_json doc;
  doc["penalty"] = to_string(model.penalty.kind);
  doc["lambda"] = model.penalty.lambda;
  if (model.penalty.kind == PenaltyKind::Lp) doc["p"] = model.penalty.p;
  if (model.penalty.kind == PenaltyKind::Log) doc["eps"] = model.penalty.epsilon;
  if (model.penalty.kind == PenaltyKind::Mcp) doc["gamma"] = model.penalty.gamma;
  doc["c"] = model.c;
  doc["converged"] = model.converged;
  doc["dimension"] = model.weights.size();
  nlohmann::ordered_json weights = nlohmann::ordered_json::object();
  for (Eigen::Index j = 0; j < model.weights.size(); ++j)
    if (model.weights[j] != 0.0) weights[std::to_string(j + 1)] = model.weights[j];
  doc["weights"] = std::move(weights);
  return doc.dump(2) + "\n";
}

ModelFile parse_model(const std::string& json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  ModelFile model;
  model.penalty.kind = penalty_kind_from_string(doc.at("penalty").get<std::string>());
  model.penalty.lambda = doc.at("lambda").get<double>();
  if (doc.contains("p")) model.penalty.p = doc["p"].get<double>();
  if (doc.contains("eps")) model.penalty.epsilon = doc["eps"].get<double>();
  if (doc.contains("gamma")) model.penalty.gamma = doc["gamma"].get<double>();
  model.c = doc.at("c").get<double>();
  model.converged = doc.at("converged").get<bool>();
  const auto dim = doc.at("dimension").get<Eigen::Index>();
  model.weights = Eigen::VectorXd::Zero(dim);
  for (const auto& [key, value] : doc.at("weights").items()) {
    const Eigen::Index j = std::stoll(key) - 1;
    if (j < 0 || j >= dim) throw std::runtime_error("weight index out of range: " + key);
    model.weights[j] = value.get<double>();
  }
  return model;
}

void save_model(const ModelFile& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << serialize_model(model);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace ranksvm
