#include "ranksvm/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranksvm {

namespace {
constexpr double kLpSmoothing = 1e-8;   // keeps the lp derivative finite at 0
constexpr double kBetaClamp = 1e12;
}  // namespace

void PenaltySpec::validate() const {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  switch (kind) {
    case PenaltyKind::L1:
      break;
    case PenaltyKind::WeightedL1:
      if ((beta.array() < 0).any()) throw std::invalid_argument("beta entries must be >= 0");
      break;
    case PenaltyKind::Lp:
      if (!(p > 0 && p < 1)) throw std::invalid_argument("p must lie in (0,1)");
      break;
    case PenaltyKind::Log:
      if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
      break;
    case PenaltyKind::Mcp:
      if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
      break;
  }
}

PenaltyKind penalty_kind_from_string(const std::string& name) {
  if (name == "l1") return PenaltyKind::L1;
  if (name == "weighted-l1") return PenaltyKind::WeightedL1;
  if (name == "lp") return PenaltyKind::Lp;
  if (name == "log") return PenaltyKind::Log;
  if (name == "mcp") return PenaltyKind::Mcp;
  throw std::invalid_argument("unknown penalty '" + name + "'");
}

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::WeightedL1: return "weighted-l1";
    case PenaltyKind::Lp: return "lp";
    case PenaltyKind::Log: return "log";
    case PenaltyKind::Mcp: return "mcp";
  }
  return "?";
}

double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& w) {
  const auto a = w.array().abs();
  switch (spec.kind) {
    case PenaltyKind::L1:
      return a.sum();
    case PenaltyKind::WeightedL1:
      if (spec.beta.size() != w.size()) throw std::invalid_argument("beta length mismatch");
      return (spec.beta.array() * a).sum();
    case PenaltyKind::Lp:
      return a.pow(spec.p).sum();
    case PenaltyKind::Log:
      return (spec.epsilon + a).log().sum();
    case PenaltyKind::Mcp: {
      const double gl = spec.gamma * spec.lambda;
      double total = 0;
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double u = a[j];
        total += u <= gl ? spec.lambda * u - u * u / (2 * spec.gamma)
                         : spec.gamma * spec.lambda * spec.lambda / 2;
      }
      return total;
    }
  }
  return 0;
}

Eigen::VectorXd reweight(const PenaltySpec& spec, const Eigen::VectorXd& w) {
  Eigen::VectorXd beta(w.size());
  switch (spec.kind) {
    case PenaltyKind::L1:
      return Eigen::VectorXd::Ones(w.size());
    case PenaltyKind::WeightedL1:
      if (spec.beta.size() != w.size()) throw std::invalid_argument("beta length mismatch");
      return spec.beta;
    case PenaltyKind::Lp:
      for (Eigen::Index j = 0; j < w.size(); ++j)
        beta[j] = spec.p * std::pow(std::abs(w[j]) + kLpSmoothing, spec.p - 1.0);
      break;
    case PenaltyKind::Log:
      beta = (spec.epsilon + w.array().abs()).inverse();
      break;
    case PenaltyKind::Mcp:
      beta = (1.0 - w.array().abs() / (spec.gamma * spec.lambda)).max(0.0);
      break;
  }
  return beta.cwiseMin(kBetaClamp).cwiseMax(0.0);
}

Eigen::VectorXd prox_weighted_l1(const Eigen::VectorXd& z, double mu, const Eigen::VectorXd& beta) {
  if (z.size() != beta.size()) throw std::invalid_argument("beta length mismatch");
  if (!(mu > 0)) throw std::invalid_argument("mu must be positive");
  Eigen::VectorXd out(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double shrink = std::abs(z[j]) - mu * beta[j];
    out[j] = shrink > 0 ? (z[j] > 0 ? shrink : -shrink) : 0.0;
  }
  return out;
}

}  // namespace ranksvm
