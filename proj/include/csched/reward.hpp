#pragma once

#include <optional>
#include <span>

#include "csched/cluster.hpp"

namespace csched {

// Weights on the contention and utilisation terms; the utilisation weight is
// always 1 - w1.
struct RewardWeights {
  double w1 = 0.4;

  double w2() const { return 1.0 - w1; }
  // Throws ConfigError unless 0 <= w1 <= 1.
  void validate() const;
  // Throws ConfigError unless w1 + w2 == 1 (to 1e-12) and w1 is in range.
  static RewardWeights from_pair(double w1, double w2);
  // Presets A..E: w1 = 0.3, 0.4, 0.5, 0.6, 0.7.
  static std::optional<RewardWeights> branch(char name);
};

inline constexpr double kRewardCsCap = 4.0;

// -w1 * cs + w2 * util.
double reward_value(const RewardWeights& weights, double mean_cs, double util);

// Arithmetic mean of per-job CS, each clipped at `cap`; 0 when nothing runs.
double mean_cs_term(std::span<const double> running_cs, double cap = kRewardCsCap);

// Reward for one round: contention term over running jobs, utilisation term as
// the fraction of occupied GPUs.
double compute_reward(const ClusterState& cluster, std::span<const double> running_cs, const RewardWeights& weights);

}  // namespace csched
