#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "csched/cluster.hpp"
#include "csched/contention.hpp"

namespace csched {

struct JobSpec {
  JobId id = 0;
  ModelClass model_class = ModelClass::GNN;
  int gpu_demand = 1;
  double total_samples = 0.0;
  double arrival_time = 0.0;     // seconds
  double ideal_throughput = 0.0;  // samples/s with no contention
  ModelProfile profile;

  double isolated_runtime() const { return total_samples / ideal_throughput; }
  // Throws ValidationError.
  void validate(const ClusterConfig& cluster) const;
};

enum class JobPhase { Waiting, Running, Preempted, Finished };
std::string_view to_string(JobPhase phase);

struct JobState {
  JobPhase phase = JobPhase::Waiting;
  double samples_done = 0.0;
  double attained_service = 0.0;  // GPU-seconds
  double submit_time = 0.0;
  std::optional<double> start_time;
  std::optional<double> finish_time;
  std::optional<Placement> placement;
  int preemption_count = 0;

  static JobState submitted(const JobSpec& spec);
};

// Integrates progress over [now, now + dt] at a constant throughput. A job that
// reaches total_samples inside the interval finishes at the exact crossing time
// and only accrues service up to it. Throws StateError unless running.
JobState advance(const JobSpec& spec, JobState state, double now, double dt, double throughput);

// Uniform over the demands in [1, max_demand] that have a j * 2^i shape on the
// cluster.
class DemandSampler {
 public:
  DemandSampler(const ClusterConfig& cluster, int max_demand, std::uint64_t seed);

  int operator()() { return support_[pick_(rng_)]; }
  template <typename Rng>
  int operator()(Rng& rng) {
    return support_[pick_(rng)];
  }
  const std::vector<int>& support() const { return support_; }

 private:
  std::vector<int> support_;
  std::uniform_int_distribution<std::size_t> pick_;
  std::mt19937_64 rng_;
};

DemandSampler demand_distribution(std::uint64_t seed, const ClusterConfig& cluster = {}, int max_demand = 32);

enum class ArrivalProcess { Batch, Poisson };

struct TraceSpec {
  // Ratios over GNN:IMG:DLRM:LM:FSDP:MoE.
  std::array<double, kNumModelClasses> mix = {1, 1, 1, 1, 1, 1};
  int num_jobs = 256;
  std::uint64_t seed = 0;
  ArrivalProcess arrival = ArrivalProcess::Batch;
  double arrival_rate = 0.1;         // jobs per second, Poisson only
  double isolated_runtime = 60.0;    // seconds; one real hour at the 1/60 time scale
  double jitter = 0.2;               // +/- multiplicative spread on bandwidth and comm/comp
  double gpu_throughput = 100.0;     // samples/s contributed by each GPU
  int max_demand = 32;

  // Throws ValidationError.
  void validate() const;
};

// Named communication-intensity mixes: normal, heavy, medium, low.
std::optional<std::array<double, kNumModelClasses>> named_mix(std::string_view name);
std::vector<std::string> mix_names();

std::vector<JobSpec> generate_trace(const TraceSpec& spec, const ClusterConfig& cluster = {});

struct Trace {
  std::optional<TraceSpec> spec;
  std::vector<JobSpec> jobs;
};

// Line-delimited key=value records; the first line is a '#' header carrying the
// generating TraceSpec.
void write_trace(std::ostream& out, const Trace& trace);
Trace read_trace(std::istream& in);
void save_trace(const std::string& path, const Trace& trace);
Trace load_trace(const std::string& path);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace csched
