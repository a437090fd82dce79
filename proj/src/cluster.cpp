#include "csched/cluster.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "csched/error.hpp"

namespace csched {

void ClusterConfig::validate() const {
  if (num_nodes < 1) throw ConfigError("num_nodes must be >= 1");
  if (gpus_per_node < 1) throw ConfigError("gpus_per_node must be >= 1");
  if (!(inter_node_bandwidth > 0.0)) throw ConfigError("inter_node_bandwidth must be > 0");
  if (!(intra_node_bandwidth > 0.0)) throw ConfigError("intra_node_bandwidth must be > 0");
}

int Placement::level() const { return std::countr_zero(static_cast<unsigned>(nodes.size())); }

bool is_power_of_two(int n) { return n > 0 && std::has_single_bit(static_cast<unsigned>(n)); }

int max_level(const ClusterConfig& config) {
  return std::bit_width(static_cast<unsigned>(config.num_nodes)) - 1;
}

std::vector<Shape> shapes_for_demand(const ClusterConfig& config, int demand) {
  std::vector<Shape> shapes;
  if (demand < 1) return shapes;
  for (int level = 0; level <= max_level(config); ++level) {
    const int nodes = 1 << level;
    if (demand % nodes != 0) continue;
    const int per_node = demand / nodes;
    if (per_node >= 1 && per_node <= config.gpus_per_node) shapes.push_back({level, per_node});
  }
  return shapes;
}

bool is_schedulable_demand(const ClusterConfig& config, int demand) {
  return !shapes_for_demand(config, demand).empty();
}

namespace {

void combinations(int n, int k, int start, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(current);
    return;
  }
  for (int v = start; v < n; ++v) {
    current.push_back(v);
    combinations(n, k, v + 1, current, out);
    current.pop_back();
  }
}

std::vector<std::vector<int>> build_node_subsets(int num_nodes) {
  std::vector<std::vector<int>> subsets;
  std::vector<int> current;
  for (int size = 1; size <= num_nodes; size <<= 1) combinations(num_nodes, size, 0, current, subsets);
  return subsets;
}

}  // namespace

const std::vector<std::vector<int>>& node_subsets(int num_nodes) {
  static constexpr int kCached = 16;
  static const auto cache = [] {
    std::vector<std::vector<std::vector<int>>> c(kCached + 1);
    for (int n = 1; n <= kCached; ++n) c[n] = build_node_subsets(n);
    return c;
  }();
  if (num_nodes < 1 || num_nodes > kCached)
    throw ConfigError("node subset enumeration supports 1.." + std::to_string(kCached) + " nodes");
  return cache[num_nodes];
}

ClusterState::ClusterState(ClusterConfig config) : config_(config) {
  config_.validate();
  occupancy_.assign(static_cast<std::size_t>(config_.total_gpus()), kNoJob);
  free_.assign(static_cast<std::size_t>(config_.num_nodes), config_.gpus_per_node);
}

JobId ClusterState::slot(int node, int gpu) const {
  return occupancy_.at(static_cast<std::size_t>(node * config_.gpus_per_node + gpu));
}

int ClusterState::free_gpus(int node) const { return free_.at(static_cast<std::size_t>(node)); }

const Placement& ClusterState::placement_of(JobId job) const {
  auto it = placements_.find(job);
  if (it == placements_.end()) throw NotFoundError("job " + std::to_string(job) + " is not placed");
  return it->second;
}

void ClusterState::check_shape(const Placement& placement) const {
  if (!is_power_of_two(placement.num_nodes()))
    throw InvalidPlacementError("placement node count must be a power of two");
  if (placement.gpus_per_node_used < 1 || placement.gpus_per_node_used > config_.gpus_per_node)
    throw InvalidPlacementError("gpus per node out of range");
  for (std::size_t a = 0; a < placement.nodes.size(); ++a) {
    const int node = placement.nodes[a];
    if (node < 0 || node >= config_.num_nodes)
      throw InvalidPlacementError("unknown node " + std::to_string(node));
    for (std::size_t b = 0; b < a; ++b)
      if (placement.nodes[b] == node) throw InvalidPlacementError("node listed twice");
  }
}

bool ClusterState::can_allocate(const Placement& placement) const {
  try {
    check_shape(placement);
  } catch (const InvalidPlacementError&) {
    return false;
  }
  return std::all_of(placement.nodes.begin(), placement.nodes.end(),
                     [&](int n) { return free_[n] >= placement.gpus_per_node_used; });
}

void ClusterState::allocate(JobId job, const Placement& placement) {
  check_shape(placement);
  if (job < 0) throw InvalidPlacementError("invalid job id");
  if (contains(job)) throw AllocationConflictError("job " + std::to_string(job) + " is already placed");
  for (int node : placement.nodes)
    if (free_[node] < placement.gpus_per_node_used)
      throw AllocationConflictError("node " + std::to_string(node) + " lacks free GPUs for job " +
                                    std::to_string(job));
  for (int node : placement.nodes) {
    int remaining = placement.gpus_per_node_used;
    for (int g = 0; g < config_.gpus_per_node && remaining > 0; ++g) {
      JobId& cell = occupancy_[static_cast<std::size_t>(node * config_.gpus_per_node + g)];
      if (cell == kNoJob) {
        cell = job;
        --remaining;
      }
    }
    free_[node] -= placement.gpus_per_node_used;
  }
  placements_.emplace(job, placement);
  used_ += placement.total_gpus();
}

void ClusterState::release(JobId job) {
  auto it = placements_.find(job);
  if (it == placements_.end()) throw NotFoundError("job " + std::to_string(job) + " is not placed");
  for (int node : it->second.nodes) {
    for (int g = 0; g < config_.gpus_per_node; ++g) {
      JobId& cell = occupancy_[static_cast<std::size_t>(node * config_.gpus_per_node + g)];
      if (cell == job) cell = kNoJob;
    }
    free_[node] += it->second.gpus_per_node_used;
  }
  used_ -= it->second.total_gpus();
  placements_.erase(it);
}

bool ClusterState::audit() const {
  std::vector<int> per_slot_count(occupancy_.size(), 0);
  std::vector<int> expected_free(free_.size(), config_.gpus_per_node);
  int used = 0;
  for (const auto& [job, placement] : placements_) {
    for (int node : placement.nodes) {
      int held = 0;
      for (int g = 0; g < config_.gpus_per_node; ++g)
        if (occupancy_[static_cast<std::size_t>(node * config_.gpus_per_node + g)] == job) ++held;
      if (held != placement.gpus_per_node_used) return false;
      expected_free[node] -= held;
    }
    used += placement.total_gpus();
  }
  for (JobId cell : occupancy_)
    if (cell != kNoJob && !placements_.count(cell)) return false;
  return used == used_ && expected_free == free_;
}

std::vector<Placement> enumerate_placements(const ClusterState& cluster, int demand) {
  const ClusterConfig& config = cluster.config();
  if (demand <= 0 || demand > config.total_gpus())
    throw InvalidDemandError("demand " + std::to_string(demand) + " outside [1, " +
                             std::to_string(config.total_gpus()) + "]");
  std::vector<Placement> out;
  for (const Shape& shape : shapes_for_demand(config, demand)) {
    for (const auto& nodes : node_subsets(config.num_nodes)) {
      if (static_cast<int>(nodes.size()) != shape.num_nodes()) continue;
      Placement p{nodes, shape.gpus_per_node};
      if (std::all_of(nodes.begin(), nodes.end(),
                      [&](int n) { return cluster.free_gpus(n) >= shape.gpus_per_node; }))
        out.push_back(std::move(p));
    }
  }
  return out;
}

ClusterState allocate(ClusterState cluster, JobId job, const Placement& placement) {
  cluster.allocate(job, placement);
  return cluster;
}

ClusterState free(ClusterState cluster, JobId job) {
  cluster.release(job);
  return cluster;
}

std::set<JobId> colocated_jobs(const ClusterState& cluster, JobId job) {
  const Placement& mine = cluster.placement_of(job);
  std::set<JobId> out;
  const int gpus = cluster.config().gpus_per_node;
  for (int node : mine.nodes)
    for (int g = 0; g < gpus; ++g) {
      JobId other = cluster.slot(node, g);
      if (other != kNoJob && other != job) out.insert(other);
    }
  return out;
}

double utilization(const ClusterState& cluster) {
  return static_cast<double>(cluster.used_gpus()) / static_cast<double>(cluster.total_gpus());
}

}  // namespace csched
