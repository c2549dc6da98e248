#pragma once

#include <Eigen/Dense>

#include <string>

namespace ranksvm {

enum class PenaltyKind { L1, WeightedL1, Lp, Log, Mcp };

/// Sparsity-inducing regularizer Omega(w) = sum_j g(|w_j|) with its
/// parameters. lambda is the regularization strength shared with the solver
/// (lambda = 1/C); it also enters the MCP formula.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::L1;
  Eigen::VectorXd beta;    // WeightedL1 only
  double p = 0.5;          // Lp, 0 < p < 1
  double epsilon = 0.1;    // Log
  double gamma = 2.0;      // Mcp
  double lambda = 1.0;

  bool is_convex() const { return kind == PenaltyKind::L1 || kind == PenaltyKind::WeightedL1; }
  void validate() const;  // throws std::invalid_argument on bad parameters
};

PenaltyKind penalty_kind_from_string(const std::string& name);
std::string to_string(PenaltyKind kind);

/// Omega(w) = sum_j g(|w_j|) for the active kind.
double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& w);

/// Majorization weights beta_j = g'(|w_j|). L1 yields all ones, WeightedL1
/// its stored beta. The Lp derivative is smoothed at zero and all entries
/// are clamped to [0, 1e12].
Eigen::VectorXd reweight(const PenaltySpec& spec, const Eigen::VectorXd& w);

/// Componentwise soft threshold sign(z_j)(|z_j| - mu*beta_j)_+; the weighted
/// l1 proximity operator. Produces exact zeros when |z_j| <= mu*beta_j.
Eigen::VectorXd prox_weighted_l1(const Eigen::VectorXd& z, double mu, const Eigen::VectorXd& beta);

}  // namespace ranksvm
