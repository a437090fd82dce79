#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csched/cluster.hpp"
#include "csched/workload.hpp"

namespace csched {

// What a policy sees each round. specs/states are indexed by job id.
struct SchedulingView {
  const ClusterState& cluster;
  std::span<const JobId> queue;
  std::span<const JobSpec> specs;
  std::span<const JobState> states;
};

// Placements are applied in order; each was feasible after the ones before it.
// Preemptions are applied before any placement.
struct Action {
  std::vector<std::pair<JobId, Placement>> placements;
  std::vector<JobId> preemptions;

  bool empty() const { return placements.empty() && preemptions.empty(); }
};

enum class PolicyKind { FifoGreedy, Las, Srtf, RlBase, RlHybrid };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);
bool is_rl(PolicyKind kind);

// Places jobs in the given order, each at its first feasible placement, skipping
// jobs that do not fit.
Action greedy_in_order(const ClusterState& cluster, std::span<const JobId> order, std::span<const JobSpec> specs);

Action decide_fifo_greedy(const SchedulingView& view);

// Ascending attained GPU-seconds, ties by arrival then id.
std::vector<JobId> las_order(const SchedulingView& view);
Action decide_las(const SchedulingView& view);

// Contention-free remaining time estimate.
double estimated_remaining(const JobSpec& spec, const JobState& state);
// Ascending estimated remaining time, ties by arrival then id.
std::vector<JobId> srtf_order(const SchedulingView& view);
// With `preemptive`, a waiting job that does not fit may evict running jobs whose
// remaining time is strictly larger than its own (largest first).
Action decide_srtf(const SchedulingView& view, bool preemptive = true);

}  // namespace csched
