#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "csched/agent.hpp"
#include "csched/cluster.hpp"
#include "csched/contention.hpp"
#include "csched/encoding.hpp"
#include "csched/policies.hpp"
#include "csched/reward.hpp"
#include "csched/workload.hpp"

namespace csched {

inline constexpr double kNoPreemption = std::numeric_limits<double>::infinity();

struct EpisodeConfig {
  double interval = 1.0;                  // T, simulated seconds per round
  double cs_preemption_threshold = 2.0;   // kNoPreemption disables
  double restore_penalty = 5.0;           // seconds before a resumed job progresses
  ContentionParams contention;
  double time_scale = 1.0 / 60.0;         // simulated seconds per real second
  std::uint64_t seed = 0;
  RewardWeights weights;
  int livelock_rounds = 10;
  bool srtf_preemptive = true;
  int candidates = 3;                     // K
  EncodingConstants encoding;

  // Throws ConfigError.
  void validate() const;
};

struct RoundRecord {
  int index = 0;
  double time = 0.0;          // round start
  double utilization = 0.0;   // occupied GPU fraction while the round ran
  double mean_cs = 0.0;       // over running jobs; 0 when none
  double reward = 0.0;
  int running = 0;
  int queued = 0;
  int placed = 0;
  int preempted = 0;
  int finished = 0;
  double work_done = 0.0;      // samples advanced this round
  double work_capacity = 0.0;  // sum of contended throughput * productive time
};

struct JobRecord {
  JobId id = 0;
  ModelClass model = ModelClass::GNN;
  int demand = 0;
  double arrival = 0.0;
  double start = 0.0;
  double finish = 0.0;
  double jct = 0.0;
  double isolated_runtime = 0.0;
  int preemptions = 0;
  double mean_cs = 1.0;  // time-weighted over the time the job held GPUs
};

inline constexpr int kUtilizationBins = 10;   // width 0.1 over [0, 1]
inline constexpr double kCsHistogramWidth = 0.1;
inline constexpr int kCsHistogramBins = 21;   // [1.0, 3.0) in 0.1 steps, then >= 3.0

struct EpisodeSummary {
  int jobs = 0;
  double avg_jct = 0.0;
  double p90_jct = 0.0;  // linear interpolation between order statistics
  double mean_utilization = 0.0;
  double mean_cs = 0.0;  // mean of per-job time-weighted CS
  double makespan = 0.0;
  int rounds = 0;
  int preemptions = 0;
  int forced_placements = 0;
  std::vector<std::pair<double, double>> jct_cdf;  // (jct, fraction of jobs <= jct)
  std::vector<int> utilization_histogram;          // rounds per bin
  std::vector<int> cs_histogram;                   // jobs per bin
};

struct EpisodeReport {
  std::string policy;
  std::vector<JobRecord> jobs;
  std::vector<RoundRecord> rounds;
  std::vector<std::string> warnings;
  EpisodeSummary summary;
};

double percentile(std::vector<double> values, double q);
EpisodeSummary summarize(const std::vector<JobRecord>& jobs, const std::vector<RoundRecord>& rounds,
                         int forced_placements);
// Recomputes the aggregates from the per-job and per-round records and compares
// them to the stored summary (relative tolerance 1e-9).
bool audit_report(const EpisodeReport& report);

// One episode of round-based scheduling. Callers drive it as
//   begin_round(); <decide>; apply(action); finish_round();
// until done(). Job ids must equal their index in the trace.
class Episode {
 public:
  Episode(std::vector<JobSpec> jobs, EpisodeConfig config, ClusterConfig cluster);

  bool done() const;
  double now() const { return now_; }
  int round_index() const { return static_cast<int>(rounds_.size()); }

  // Enqueues jobs that have arrived by now.
  void begin_round();

  SchedulingView view() const { return {cluster_, queue_view(), specs_, states_}; }
  CandidateSet candidates() const;
  FeatureLookup features() const;
  StateTensor observe(const CandidateSet& candidates) const;

  // Applies preemptions, then placements. Throws StateError for jobs that are
  // not waiting and AllocationConflictError for infeasible placements. Runs the
  // livelock guard afterwards.
  void apply(const Action& action);

  // Contention, progress, finishes, threshold preemption and metrics for the
  // round; advances the clock by the interval.
  const RoundRecord& finish_round();

  // Frees the job's GPUs and re-queues it at the head with its progress kept;
  // the restore penalty is charged when it next starts. Throws StateError.
  void preempt(JobId job);

  // Contention sensitivity of every running job under the current placements.
  std::vector<std::pair<JobId, double>> running_cs() const;

  const ClusterState& cluster() const { return cluster_; }
  const std::vector<JobSpec>& specs() const { return specs_; }
  const std::vector<JobState>& states() const { return states_; }
  const std::deque<JobId>& queue() const { return queue_; }
  const EpisodeConfig& config() const { return config_; }
  const std::vector<RoundRecord>& rounds() const { return rounds_; }
  int forced_placements() const { return forced_; }

  EpisodeReport report(std::string policy_name) const;

 private:
  std::span<const JobId> queue_view() const;
  void place(JobId job, const Placement& placement);

  EpisodeConfig config_;
  ClusterState cluster_;
  std::vector<JobSpec> specs_;
  std::vector<JobState> states_;
  std::vector<double> penalty_due_;   // seconds of restore still to pay
  std::vector<double> last_cs_;       // 0 until first profiled
  std::vector<double> cs_time_;       // integral of CS over held time
  std::vector<double> held_time_;
  std::vector<bool> restore_pending_;
  std::deque<JobId> queue_;
  mutable std::vector<JobId> queue_buffer_;
  std::size_t next_arrival_ = 0;      // index into arrival order
  std::vector<JobId> arrival_order_;
  double now_ = 0.0;
  int idle_rounds_ = 0;
  int forced_ = 0;
  int placed_this_round_ = 0;
  int preempted_this_round_ = 0;
  std::vector<RoundRecord> rounds_;
  std::vector<std::string> warnings_;
};

struct PolicyHandle {
  PolicyKind kind = PolicyKind::FifoGreedy;
  const PolicyNetd* net = nullptr;  // required for RL kinds
  std::string name;                 // defaults to the kind's name

  std::string label() const { return name.empty() ? std::string(to_string(kind)) : name; }
};

// The decision a policy makes for the current round of `episode`.
Action decide(const PolicyHandle& policy, const Episode& episode, DecisionMode mode = DecisionMode::Greedy,
              std::mt19937_64* rng = nullptr);

// Runs to completion. RL policies act greedily (arg-max).
// Throws UsageError for an RL kind without a network.
EpisodeReport run_episode(const PolicyHandle& policy, std::vector<JobSpec> trace, const EpisodeConfig& config,
                          const ClusterConfig& cluster);

struct PolicyAggregate {
  std::string name;
  double avg_jct = 0.0;
  double p90_jct = 0.0;
  double mean_utilization = 0.0;
  double mean_cs = 0.0;
  std::vector<EpisodeReport> episodes;  // one per trace
};

struct MetricDelta {
  std::string base, other;
  // (other - base) / base * 100
  double avg_jct = 0.0, p90_jct = 0.0, mean_utilization = 0.0, mean_cs = 0.0;
};

struct ComparisonReport {
  std::vector<PolicyAggregate> policies;
  std::vector<MetricDelta> deltas;  // every ordered pair (base, other), base != other
};

double percent_delta(double base, double other);

// Every policy runs every trace under the same configuration and seed.
ComparisonReport compare_policies(const std::vector<PolicyHandle>& policies,
                                  const std::vector<std::vector<JobSpec>>& traces, const EpisodeConfig& config,
                                  const ClusterConfig& cluster);

}  // namespace csched
