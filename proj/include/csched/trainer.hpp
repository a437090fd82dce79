#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csched/cluster.hpp"
#include "csched/engine.hpp"
#include "csched/policy_net.hpp"
#include "csched/reward.hpp"
#include "csched/workload.hpp"

namespace csched {

struct TrainConfig {
  int episodes = 20;
  std::string checkpoint_path;  // empty: do not save
  double learning_rate = 1e-3;
  double discount = 0.99;       // per round
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 1.0;
  int update_every = 32;        // decision steps per policy update; 0 = once per episode
  int hidden = 256;
  std::uint64_t seed = 0;
  EpisodeConfig episode;        // interval, weights, K and preemption knobs live here

  // Throws ConfigError.
  void validate() const;
};

struct TrainCurvePoint {
  int episode = 0;
  double mean_reward = 0.0;
  double mean_cs = 0.0;    // round mean over rounds with running jobs
  double mean_utilization = 0.0;
  double avg_jct = 0.0;
  int decisions = 0;
  int updates = 0;
  int forced_placements = 0;
};

struct TrainResult {
  PolicyNetd policy;
  std::vector<TrainCurvePoint> curve;
};

// Runs the configured number of episodes on `trace`, sampling actions from the
// current policy and updating it from the collected decision steps. Saves the
// final checkpoint when a path is configured. Deterministic given the seed.
TrainResult train(const std::vector<JobSpec>& trace, const TrainConfig& config, const ClusterConfig& cluster = {},
                  const std::string& trace_id = "");

// Same, starting from an existing policy.
TrainResult train(PolicyNetd initial, const std::vector<JobSpec>& trace, const TrainConfig& config,
                  const ClusterConfig& cluster = {}, const std::string& trace_id = "");

}  // namespace csched
