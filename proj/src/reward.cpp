#include "csched/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csched/error.hpp"

namespace csched {

void RewardWeights::validate() const {
  if (!(w1 >= 0.0 && w1 <= 1.0)) throw ConfigError("w1 must lie in [0, 1], got " + std::to_string(w1));
}

RewardWeights RewardWeights::from_pair(double w1, double w2) {
  RewardWeights w{w1};
  w.validate();
  if (!(std::abs(w1 + w2 - 1.0) <= 1e-12)) throw ConfigError("reward weights must satisfy w1 + w2 = 1");
  return w;
}

std::optional<RewardWeights> RewardWeights::branch(char name) {
  switch (name) {
    case 'A': return RewardWeights{0.3};
    case 'B': return RewardWeights{0.4};
    case 'C': return RewardWeights{0.5};
    case 'D': return RewardWeights{0.6};
    case 'E': return RewardWeights{0.7};
    default: return std::nullopt;
  }
}

double reward_value(const RewardWeights& weights, double mean_cs, double util) {
  return -weights.w1 * mean_cs + weights.w2() * util;
}

double mean_cs_term(std::span<const double> running_cs, double cap) {
  if (running_cs.empty()) return 0.0;
  double total = 0.0;
  for (double cs : running_cs) total += std::min(cs, cap);
  return total / static_cast<double>(running_cs.size());
}

double compute_reward(const ClusterState& cluster, std::span<const double> running_cs, const RewardWeights& weights) {
  return reward_value(weights, mean_cs_term(running_cs), utilization(cluster));
}

}  // namespace csched
