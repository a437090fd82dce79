#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "csched/cluster.hpp"
#include "csched/contention.hpp"

namespace csched {

// Per-slot feature layout: one-hot model class, then four scalars in [0, 1].
inline constexpr int kFeatureDim = kNumModelClasses + 4;
enum FeatureIndex : int {
  kFeatCommComp = kNumModelClasses,
  kFeatBandwidth,
  kFeatContention,
  kFeatProgress,
};

// Fixed normalisers, chosen above the largest values in the workload table.
struct EncodingConstants {
  double bandwidth_scale = 3000.0;  // MB/s
  double comm_comp_scale = 15.0;
  double cs_cap = 4.0;

  void validate() const;
};

// Observation of shape [nodes][2 * gpus_per_node][kFeatureDim]. Columns
// [0, G) mirror physical GPU slots; column G + j - 1 of row i holds a candidate
// that can be split as j GPUs on each of 2^i nodes.
class StateTensor {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, kFeatureDim, Eigen::RowMajor>;

  StateTensor(int num_nodes, int gpus_per_node);

  int num_nodes() const { return num_nodes_; }
  int slots_per_row() const { return 2 * gpus_per_node_; }
  int gpus_per_node() const { return gpus_per_node_; }

  auto slot(int node, int column) { return values_.row(node * slots_per_row() + column); }
  auto slot(int node, int column) const { return values_.row(node * slots_per_row() + column); }
  bool slot_is_zero(int node, int column) const { return slot(node, column).isZero(0.0); }

  // Row-major flattening used as network input.
  Eigen::Map<const Eigen::VectorXd> flat() const { return {values_.data(), values_.size()}; }
  Eigen::Index size() const { return values_.size(); }
  const Storage& values() const { return values_; }

  friend bool operator==(const StateTensor& a, const StateTensor& b) {
    return a.num_nodes_ == b.num_nodes_ && a.gpus_per_node_ == b.gpus_per_node_ && a.values_ == b.values_;
  }

 private:
  int num_nodes_;
  int gpus_per_node_;
  Storage values_;
};

struct CandidateSet {
  std::vector<JobId> jobs;
  std::vector<int> demands;

  std::size_t size() const { return jobs.size(); }
  bool empty() const { return jobs.empty(); }
};

// First k jobs from the queue head with pairwise distinct demands.
CandidateSet select_candidates(std::span<const JobId> queue, const std::function<int(JobId)>& demand_of, int k);

// What the encoder needs to know about a job.
struct JobFeatures {
  ModelClass model = ModelClass::GNN;
  double comm_comp_ratio = 0.0;
  double avg_bandwidth = 0.0;
  double last_cs = 0.0;  // 0 when never profiled
  double progress = 0.0;  // fraction of samples done
};
using FeatureLookup = std::function<JobFeatures(JobId)>;

Eigen::Matrix<double, 1, kFeatureDim> job_feature_vector(const JobFeatures& f, const EncodingConstants& c);

// Throws ConfigError on bad constants.
StateTensor encode_state(const ClusterState& cluster, const CandidateSet& candidates,
                         const FeatureLookup& features, const EncodingConstants& constants = {});

// One CSV block per feature: rows "feature,node,v0,...,v{2G-1}".
void write_state_csv(std::ostream& out, const StateTensor& state);

}  // namespace csched
