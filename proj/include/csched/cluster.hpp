#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace csched {

using JobId = std::int32_t;
inline constexpr JobId kNoJob = -1;

struct ClusterConfig {
  int num_nodes = 4;
  int gpus_per_node = 8;
  // MB/s. The inter-node default is an effective per-NIC share calibrated
  // against the moderate co-location figures (IMG next to FSDP); the
  // intra-node default is PCIe Gen3 x16.
  double inter_node_bandwidth = 900.0;
  double intra_node_bandwidth = 16000.0;

  int total_gpus() const { return num_nodes * gpus_per_node; }
  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const ClusterConfig&, const ClusterConfig&) = default;
};

// A job spread over 2^i distinct nodes with the same GPU count j on each.
struct Placement {
  std::vector<int> nodes;
  int gpus_per_node_used = 0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int total_gpus() const { return num_nodes() * gpus_per_node_used; }
  // The exponent i in |nodes| = 2^i.
  int level() const;
  bool spans_nodes() const { return nodes.size() > 1; }

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct Shape {
  int level = 0;  // i
  int gpus_per_node = 0;  // j

  int num_nodes() const { return 1 << level; }
  int total_gpus() const { return num_nodes() * gpus_per_node; }
  friend auto operator<=>(const Shape&, const Shape&) = default;
};

bool is_power_of_two(int n);
// Largest i with 2^i <= num_nodes.
int max_level(const ClusterConfig& config);
// Every (i, j) with j * 2^i == demand that fits an empty cluster, ascending i.
std::vector<Shape> shapes_for_demand(const ClusterConfig& config, int demand);
// True iff at least one shape exists for the demand.
bool is_schedulable_demand(const ClusterConfig& config, int demand);
// All node subsets of power-of-two size, ordered by size then lexicographically.
// These index the per-candidate placement choices of the RL action space.
const std::vector<std::vector<int>>& node_subsets(int num_nodes);

// Nodes x GPU slots occupancy grid plus the per-job placement map. The two are
// kept consistent by allocate/release; audit() re-derives one from the other.
class ClusterState {
 public:
  explicit ClusterState(ClusterConfig config = {});

  const ClusterConfig& config() const { return config_; }

  JobId slot(int node, int gpu) const;
  int free_gpus(int node) const;
  int used_gpus() const { return used_; }
  int total_gpus() const { return config_.total_gpus(); }
  bool empty() const { return placements_.empty(); }

  const std::map<JobId, Placement>& placements() const { return placements_; }
  bool contains(JobId job) const { return placements_.count(job) != 0; }
  // Throws NotFoundError.
  const Placement& placement_of(JobId job) const;

  // Placement must satisfy the shape rules and fit current occupancy; slots are
  // taken lowest-index first on every node. Strong exception guarantee.
  // Throws InvalidPlacementError, AllocationConflictError.
  void allocate(JobId job, const Placement& placement);
  bool can_allocate(const Placement& placement) const;
  // Vacates every slot of the job. Throws NotFoundError.
  void release(JobId job);

  // Rebuilds the occupancy implied by the placement map and compares.
  bool audit() const;

  friend bool operator==(const ClusterState&, const ClusterState&) = default;

 private:
  void check_shape(const Placement& placement) const;

  ClusterConfig config_;
  std::vector<JobId> occupancy_;  // row-major [node][gpu]
  std::vector<int> free_;         // per node
  std::map<JobId, Placement> placements_;
  int used_ = 0;
};

// Every feasible placement of `demand` GPUs given current occupancy, ascending
// node count then lexicographic node ids. Throws InvalidDemandError.
std::vector<Placement> enumerate_placements(const ClusterState& cluster, int demand);

// Value-style wrappers around the in-place mutators.
ClusterState allocate(ClusterState cluster, JobId job, const Placement& placement);
ClusterState free(ClusterState cluster, JobId job);

// Other jobs sharing at least one node. Throws NotFoundError.
std::set<JobId> colocated_jobs(const ClusterState& cluster, JobId job);

double utilization(const ClusterState& cluster);

}  // namespace csched
