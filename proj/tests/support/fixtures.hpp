#pragma once
// Small builders shared by the unit and acceptance tests.

#include <vector>

#include <csched/engine.hpp>
#include <csched/workload.hpp>

namespace fixture {

inline csched::JobSpec job(csched::JobId id, int demand, double runtime, csched::ModelClass m = csched::ModelClass::IMG,
                           double arrival = 0.0) {
  csched::JobSpec s;
  s.id = id;
  s.model_class = m;
  s.gpu_demand = demand;
  s.ideal_throughput = 100.0 * demand;
  s.total_samples = s.ideal_throughput * runtime;
  s.arrival_time = arrival;
  s.profile = csched::default_profile(m);
  return s;
}

inline csched::EpisodeConfig no_contention() {
  csched::EpisodeConfig c;
  c.contention = csched::ContentionParams::disabled();
  return c;
}

}  // namespace fixture
