#include "csched/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "csched/error.hpp"
#include "csched/workload.hpp"

namespace csched {

void EncodingConstants::validate() const {
  if (!(bandwidth_scale > 0.0) || !(comm_comp_scale > 0.0) || !(cs_cap > 0.0))
    throw ConfigError("feature normalisation constants must be positive");
}

StateTensor::StateTensor(int num_nodes, int gpus_per_node)
    : num_nodes_(num_nodes),
      gpus_per_node_(gpus_per_node),
      values_(Storage::Zero(static_cast<Eigen::Index>(num_nodes) * 2 * gpus_per_node, kFeatureDim)) {}

CandidateSet select_candidates(std::span<const JobId> queue, const std::function<int(JobId)>& demand_of, int k) {
  CandidateSet out;
  if (k < 1) return out;
  for (JobId job : queue) {
    const int d = demand_of(job);
    if (std::find(out.demands.begin(), out.demands.end(), d) != out.demands.end()) continue;
    out.jobs.push_back(job);
    out.demands.push_back(d);
    if (static_cast<int>(out.jobs.size()) == k) break;
  }
  return out;
}

Eigen::Matrix<double, 1, kFeatureDim> job_feature_vector(const JobFeatures& f, const EncodingConstants& c) {
  Eigen::Matrix<double, 1, kFeatureDim> v = Eigen::Matrix<double, 1, kFeatureDim>::Zero();
  v(static_cast<int>(f.model)) = 1.0;
  v(kFeatCommComp) = std::clamp(f.comm_comp_ratio / c.comm_comp_scale, 0.0, 1.0);
  v(kFeatBandwidth) = std::clamp(f.avg_bandwidth / c.bandwidth_scale, 0.0, 1.0);
  v(kFeatContention) = std::clamp(f.last_cs, 0.0, c.cs_cap) / c.cs_cap;
  v(kFeatProgress) = std::clamp(f.progress, 0.0, 1.0);
  return v;
}

StateTensor encode_state(const ClusterState& cluster, const CandidateSet& candidates,
                         const FeatureLookup& features, const EncodingConstants& constants) {
  constants.validate();
  const ClusterConfig& config = cluster.config();
  StateTensor state(config.num_nodes, config.gpus_per_node);

  for (const auto& [job, placement] : cluster.placements()) {
    const auto row = job_feature_vector(features(job), constants);
    for (int node : placement.nodes)
      for (int g = 0; g < config.gpus_per_node; ++g)
        if (cluster.slot(node, g) == job) state.slot(node, g) = row;
  }

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto row = job_feature_vector(features(candidates.jobs[c]), constants);
    for (const Shape& shape : shapes_for_demand(config, candidates.demands[c]))
      state.slot(shape.level, config.gpus_per_node + shape.gpus_per_node - 1) = row;
  }
  return state;
}

void write_state_csv(std::ostream& out, const StateTensor& state) {
  out << "feature,node";
  for (int s = 0; s < state.slots_per_row(); ++s) out << ",slot" << s;
  out << '\n';
  for (int f = 0; f < kFeatureDim; ++f)
    for (int n = 0; n < state.num_nodes(); ++n) {
      out << f << ',' << n;
      for (int s = 0; s < state.slots_per_row(); ++s) out << ',' << format_double(state.slot(n, s)(f));
      out << '\n';
    }
}

}  // namespace csched
