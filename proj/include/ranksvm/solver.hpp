#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ranksvm/letor.hpp"
#include "ranksvm/penalties.hpp"

namespace ranksvm {

enum class LipschitzMode { SumNorms, Spectral };

struct SolverConfig {
  double c = 1.0;  // lambda = 1/c
  double inner_tol = 1e-8;
  int inner_max_iter = 10000;
  int inner_tol_patience = 5;  // consecutive small relative changes required
  double outer_tol = 1e-5;
  int outer_max_iter = 20;
  LipschitzMode lipschitz_mode = LipschitzMode::SumNorms;

  double lambda() const { return 1.0 / c; }
};

inline constexpr double kZeroThreshold = 1e-10;

struct FitResult {
  Eigen::VectorXd weights;
  std::vector<double> objective_trace;
  int inner_iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
  int nonzero_count = 0;
};

/// J1(w) = sum_p max(0, 1 - xtilde_p' w)^2, accumulated in pair order.
double squared_hinge_loss(const PreferencePairs& pairs, const Dataset& dataset,
                          const Eigen::VectorXd& w);

/// grad J1(w) = -2 sum_p xtilde_p max(0, 1 - xtilde_p' w).
Eigen::VectorXd squared_hinge_gradient(const PreferencePairs& pairs, const Dataset& dataset,
                                       const Eigen::VectorXd& w);

/// Lipschitz bound for grad J1. SumNorms: 2 * sum_p ||xtilde_p||^2.
/// Spectral: 2 * sigma_max(Xtilde)^2 via power iteration (tighter).
double lipschitz_constant(const PreferencePairs& pairs, const Dataset& dataset, LipschitzMode mode);

/// J1(w) + lambda * Omega(w).
double objective(const PreferencePairs& pairs, const Dataset& dataset, const PenaltySpec& spec,
                 const Eigen::VectorXd& w);

/// Accelerated forward-backward splitting for the convex penalties
/// (l1 / weighted l1). Starts from w0 when given, otherwise zero.
FitResult fista_solve(const PreferencePairs& pairs, const Dataset& dataset, const PenaltySpec& spec,
                      const SolverConfig& config, const Eigen::VectorXd* w0 = nullptr);

/// Reweighted-l1 majorization-minimization loop for the non-convex
/// penalties (lp / log / mcp). Each outer step solves a weighted-l1
/// subproblem warm-started at the previous iterate.
FitResult reweighted_solve(const PreferencePairs& pairs, const Dataset& dataset,
                           const PenaltySpec& spec, const SolverConfig& config);

/// Per-document scores x_i' w; ranking within a query is by descending score.
Eigen::VectorXd predict_scores(const Eigen::VectorXd& weights, const Dataset& dataset);

/// Model persistence: JSON document with penalty metadata and the weight
/// map; round-trips exactly for finite weights.
struct ModelFile {
  Eigen::VectorXd weights;
  PenaltySpec penalty;
  double c = 1.0;
  bool converged = false;
};

std::string serialize_model(const ModelFile& model);
ModelFile parse_model(const std::string& json_text);
void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace ranksvm
