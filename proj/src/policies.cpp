#include "csched/policies.hpp"

#include <algorithm>
#include <tuple>

namespace csched {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::FifoGreedy: return "greedy";
    case PolicyKind::Las: return "las";
    case PolicyKind::Srtf: return "srtf";
    case PolicyKind::RlBase: return "rl-base";
    case PolicyKind::RlHybrid: return "rl-hybrid";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  for (PolicyKind k : {PolicyKind::FifoGreedy, PolicyKind::Las, PolicyKind::Srtf, PolicyKind::RlBase,
                       PolicyKind::RlHybrid})
    if (to_string(k) == name) return k;
  if (name == "fifo" || name == "fifo-greedy") return PolicyKind::FifoGreedy;
  return std::nullopt;
}

bool is_rl(PolicyKind kind) { return kind == PolicyKind::RlBase || kind == PolicyKind::RlHybrid; }

Action greedy_in_order(const ClusterState& cluster, std::span<const JobId> order, std::span<const JobSpec> specs) {
  Action action;
  ClusterState scratch = cluster;
  for (JobId job : order) {
    if (scratch.used_gpus() == scratch.total_gpus()) break;
    const int demand = specs[static_cast<std::size_t>(job)].gpu_demand;
    if (demand > scratch.total_gpus() - scratch.used_gpus()) continue;
    auto options = enumerate_placements(scratch, demand);
    if (options.empty()) continue;
    scratch.allocate(job, options.front());
    action.placements.emplace_back(job, std::move(options.front()));
  }
  return action;
}

Action decide_fifo_greedy(const SchedulingView& view) { return greedy_in_order(view.cluster, view.queue, view.specs); }

namespace {

template <typename Key>
std::vector<JobId> sorted_queue(const SchedulingView& view, Key key) {
  std::vector<JobId> order(view.queue.begin(), view.queue.end());
  std::stable_sort(order.begin(), order.end(), [&](JobId a, JobId b) {
    const auto& sa = view.specs[static_cast<std::size_t>(a)];
    const auto& sb = view.specs[static_cast<std::size_t>(b)];
    return std::make_tuple(key(a), sa.arrival_time, a) < std::make_tuple(key(b), sb.arrival_time, b);
  });
  return order;
}

}  // namespace

std::vector<JobId> las_order(const SchedulingView& view) {
  return sorted_queue(view, [&](JobId j) { return view.states[static_cast<std::size_t>(j)].attained_service; });
}

Action decide_las(const SchedulingView& view) {
  const auto order = las_order(view);
  return greedy_in_order(view.cluster, order, view.specs);
}

double estimated_remaining(const JobSpec& spec, const JobState& state) {
  return (spec.total_samples - state.samples_done) / spec.ideal_throughput;
}

std::vector<JobId> srtf_order(const SchedulingView& view) {
  return sorted_queue(view, [&](JobId j) {
    return estimated_remaining(view.specs[static_cast<std::size_t>(j)], view.states[static_cast<std::size_t>(j)]);
  });
}

Action decide_srtf(const SchedulingView& view, bool preemptive) {
  const auto order = srtf_order(view);
  Action action = greedy_in_order(view.cluster, order, view.specs);
  if (!preemptive) return action;

  ClusterState scratch = view.cluster;
  for (const auto& [job, placement] : action.placements) scratch.allocate(job, placement);
  auto remaining = [&](JobId j) {
    return estimated_remaining(view.specs[static_cast<std::size_t>(j)], view.states[static_cast<std::size_t>(j)]);
  };

  for (JobId waiting : order) {
    if (scratch.contains(waiting)) continue;
    const double mine = remaining(waiting);
    // Victims: jobs that were running before this round, longest remaining first.
    std::vector<JobId> victims;
    for (const auto& [job, placement] : view.cluster.placements())
      if (scratch.contains(job) && remaining(job) > mine) victims.push_back(job);
    std::stable_sort(victims.begin(), victims.end(), [&](JobId a, JobId b) {
      const double ra = remaining(a), rb = remaining(b);
      return ra != rb ? ra > rb : a > b;
    });
    if (victims.empty()) continue;

    ClusterState trial = scratch;
    std::vector<JobId> evicted;
    const int demand = view.specs[static_cast<std::size_t>(waiting)].gpu_demand;
    std::vector<Placement> options;
    for (JobId v : victims) {
      trial.release(v);
      evicted.push_back(v);
      options = enumerate_placements(trial, demand);
      if (!options.empty()) break;
    }
    if (options.empty()) continue;
    trial.allocate(waiting, options.front());
    scratch = std::move(trial);
    action.preemptions.insert(action.preemptions.end(), evicted.begin(), evicted.end());
    action.placements.emplace_back(waiting, std::move(options.front()));
  }
  return action;
}

}  // namespace csched
