#include "csched/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "csched/error.hpp"

namespace csched {

void EpisodeConfig::validate() const {
  if (!(interval > 0.0)) throw ConfigError("round interval must be > 0");
  if (!(cs_preemption_threshold > 1.0)) throw ConfigError("CS preemption threshold must be > 1");
  if (!(restore_penalty >= 0.0)) throw ConfigError("restore penalty must be >= 0");
  if (!(time_scale > 0.0)) throw ConfigError("time scale must be > 0");
  if (livelock_rounds < 1) throw ConfigError("livelock guard needs at least one round");
  if (candidates < 1) throw ConfigError("candidate count K must be >= 1");
  weights.validate();
  contention.validate();
  encoding.validate();
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EpisodeSummary summarize(const std::vector<JobRecord>& jobs, const std::vector<RoundRecord>& rounds,
                         int forced_placements) {
  EpisodeSummary s;
  s.jobs = static_cast<int>(jobs.size());
  s.rounds = static_cast<int>(rounds.size());
  s.forced_placements = forced_placements;
  s.utilization_histogram.assign(kUtilizationBins, 0);
  s.cs_histogram.assign(kCsHistogramBins, 0);

  std::vector<double> jct;
  jct.reserve(jobs.size());
  for (const JobRecord& j : jobs) {
    jct.push_back(j.jct);
    s.mean_cs += j.mean_cs;
    s.makespan = std::max(s.makespan, j.finish);
    s.preemptions += j.preemptions;
    const int bin = static_cast<int>(std::floor((j.mean_cs - 1.0) / kCsHistogramWidth + 1e-9));
    ++s.cs_histogram[static_cast<std::size_t>(std::clamp(bin, 0, kCsHistogramBins - 1))];
  }
  if (!jobs.empty()) {
    s.avg_jct = std::accumulate(jct.begin(), jct.end(), 0.0) / static_cast<double>(jobs.size());
    s.mean_cs /= static_cast<double>(jobs.size());
    s.p90_jct = percentile(jct, 0.9);
    std::sort(jct.begin(), jct.end());
    for (std::size_t i = 0; i < jct.size(); ++i)
      s.jct_cdf.emplace_back(jct[i], static_cast<double>(i + 1) / static_cast<double>(jct.size()));
  }
  for (const RoundRecord& r : rounds) {
    s.mean_utilization += r.utilization;
    const int bin = static_cast<int>(std::floor(r.utilization * kUtilizationBins + 1e-9));
    ++s.utilization_histogram[static_cast<std::size_t>(std::clamp(bin, 0, kUtilizationBins - 1))];
  }
  if (!rounds.empty()) s.mean_utilization /= static_cast<double>(rounds.size());
  return s;
}

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

bool audit_report(const EpisodeReport& report) {
  const EpisodeSummary fresh = summarize(report.jobs, report.rounds, report.summary.forced_placements);
  const EpisodeSummary& s = report.summary;
  return fresh.jobs == s.jobs && close(fresh.avg_jct, s.avg_jct) && close(fresh.p90_jct, s.p90_jct) &&
         close(fresh.mean_utilization, s.mean_utilization) && close(fresh.mean_cs, s.mean_cs) &&
         close(fresh.makespan, s.makespan) && fresh.rounds == s.rounds && fresh.preemptions == s.preemptions &&
         fresh.utilization_histogram == s.utilization_histogram && fresh.cs_histogram == s.cs_histogram &&
         fresh.jct_cdf.size() == s.jct_cdf.size();
}

Episode::Episode(std::vector<JobSpec> jobs, EpisodeConfig config, ClusterConfig cluster)
    : config_(std::move(config)), cluster_(cluster), specs_(std::move(jobs)) {
  config_.validate();
  const std::size_t n = specs_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (specs_[i].id != static_cast<JobId>(i))
      throw ValidationError("job ids must equal their position in the trace (job at " + std::to_string(i) +
                            " has id " + std::to_string(specs_[i].id) + ")");
    specs_[i].validate(cluster);
    states_.push_back(JobState::submitted(specs_[i]));
  }
  penalty_due_.assign(n, 0.0);
  last_cs_.assign(n, 0.0);
  cs_time_.assign(n, 0.0);
  held_time_.assign(n, 0.0);
  restore_pending_.assign(n, false);
  arrival_order_.resize(n);
  std::iota(arrival_order_.begin(), arrival_order_.end(), 0);
  std::stable_sort(arrival_order_.begin(), arrival_order_.end(), [&](JobId a, JobId b) {
    return specs_[static_cast<std::size_t>(a)].arrival_time < specs_[static_cast<std::size_t>(b)].arrival_time;
  });
}

bool Episode::done() const { return next_arrival_ == specs_.size() && queue_.empty() && cluster_.empty(); }

void Episode::begin_round() {
  placed_this_round_ = 0;
  preempted_this_round_ = 0;
  while (next_arrival_ < arrival_order_.size() &&
         specs_[static_cast<std::size_t>(arrival_order_[next_arrival_])].arrival_time <= now_ + 1e-9)
    queue_.push_back(arrival_order_[next_arrival_++]);
}

std::span<const JobId> Episode::queue_view() const {
  queue_buffer_.assign(queue_.begin(), queue_.end());
  return queue_buffer_;
}

CandidateSet Episode::candidates() const {
  return select_candidates(
      queue_view(), [&](JobId j) { return specs_[static_cast<std::size_t>(j)].gpu_demand; }, config_.candidates);
}

FeatureLookup Episode::features() const {
  return [this](JobId j) {
    const auto i = static_cast<std::size_t>(j);
    const JobSpec& s = specs_[i];
    return JobFeatures{s.model_class, s.profile.comm_comp_ratio, s.profile.avg_bandwidth, last_cs_[i],
                       states_[i].samples_done / s.total_samples};
  };
}

StateTensor Episode::observe(const CandidateSet& candidates) const {
  return encode_state(cluster_, candidates, features(), config_.encoding);
}

void Episode::place(JobId job, const Placement& placement) {
  const auto i = static_cast<std::size_t>(job);
  cluster_.allocate(job, placement);
  auto it = std::find(queue_.begin(), queue_.end(), job);
  queue_.erase(it);
  JobState& st = states_[i];
  st.phase = JobPhase::Running;
  st.placement = placement;
  if (!st.start_time) st.start_time = now_;
  if (restore_pending_[i]) {
    penalty_due_[i] = config_.restore_penalty;
    restore_pending_[i] = false;
  }
  ++placed_this_round_;
}

void Episode::apply(const Action& action) {
  // Validate the whole action on a scratch copy so a bad action changes nothing.
  ClusterState scratch = cluster_;
  for (JobId job : action.preemptions) {
    if (job < 0 || static_cast<std::size_t>(job) >= specs_.size() ||
        states_[static_cast<std::size_t>(job)].phase != JobPhase::Running)
      throw StateError("cannot preempt job " + std::to_string(job) + ": not running");
    scratch.release(job);
  }
  for (const auto& [job, placement] : action.placements) {
    if (job < 0 || static_cast<std::size_t>(job) >= specs_.size())
      throw StateError("unknown job " + std::to_string(job));
    if (scratch.contains(job)) throw StateError("job " + std::to_string(job) + " is placed twice");
    const JobState& st = states_[static_cast<std::size_t>(job)];
    const bool queued = std::find(queue_.begin(), queue_.end(), job) != queue_.end();
    const bool preempted_now =
        std::find(action.preemptions.begin(), action.preemptions.end(), job) != action.preemptions.end();
    if (!queued || preempted_now || (st.phase != JobPhase::Waiting && st.phase != JobPhase::Preempted))
      throw StateError("job " + std::to_string(job) + " is not waiting in the queue");
    if (placement.total_gpus() != specs_[static_cast<std::size_t>(job)].gpu_demand)
      throw InvalidPlacementError("placement size differs from job " + std::to_string(job) + "'s demand");
    scratch.allocate(job, placement);
  }

  for (JobId job : action.preemptions) preempt(job);
  for (const auto& [job, placement] : action.placements) place(job, placement);

  if (placed_this_round_ == 0 && cluster_.empty() && !queue_.empty()) {
    if (++idle_rounds_ >= config_.livelock_rounds) {
      Action forced = greedy_in_order(cluster_, queue_view(), specs_);
      if (!forced.placements.empty()) {
        const auto& [job, placement] = forced.placements.front();
        place(job, placement);
        ++forced_;
        warnings_.push_back("round " + std::to_string(round_index()) + ": no progress for " +
                            std::to_string(idle_rounds_) + " rounds, forced greedy placement of job " +
                            std::to_string(job));
      }
      idle_rounds_ = 0;
    }
  } else {
    idle_rounds_ = 0;
  }
}

void Episode::preempt(JobId job) {
  if (job < 0 || static_cast<std::size_t>(job) >= specs_.size())
    throw StateError("unknown job " + std::to_string(job));
  const auto i = static_cast<std::size_t>(job);
  JobState& st = states_[i];
  if (st.phase != JobPhase::Running) throw StateError("cannot preempt job " + std::to_string(job) + ": not running");
  cluster_.release(job);
  st.phase = JobPhase::Preempted;
  st.placement.reset();
  ++st.preemption_count;
  restore_pending_[i] = true;
  penalty_due_[i] = 0.0;
  queue_.push_front(job);
  ++preempted_this_round_;
}

std::vector<std::pair<JobId, double>> Episode::running_cs() const {
  const auto& placements = cluster_.placements();
  std::vector<PlacedJob> placed;
  placed.reserve(placements.size());
  for (const auto& [job, placement] : placements)
    placed.push_back({&specs_[static_cast<std::size_t>(job)].profile, &placement});
  std::vector<std::pair<JobId, double>> out;
  out.reserve(placements.size());
  std::size_t k = 0;
  for (const auto& [job, placement] : placements)
    out.emplace_back(job, contention_sensitivity(placed[k++], placed, config_.contention, cluster_.config()));
  return out;
}

const RoundRecord& Episode::finish_round() {
  const double dt = config_.interval;
  RoundRecord rec;
  rec.index = round_index();
  rec.time = now_;
  rec.queued = static_cast<int>(queue_.size());
  rec.placed = placed_this_round_;

  const auto cs = running_cs();
  std::vector<double> cs_values;
  cs_values.reserve(cs.size());
  for (const auto& [job, value] : cs) cs_values.push_back(value);
  rec.running = static_cast<int>(cs.size());
  rec.utilization = utilization(cluster_);
  rec.mean_cs = cs_values.empty() ? 0.0
                                  : std::accumulate(cs_values.begin(), cs_values.end(), 0.0) /
                                        static_cast<double>(cs_values.size());
  rec.reward = compute_reward(cluster_, cs_values, config_.weights);

  std::vector<JobId> finished;
  for (const auto& [job, value] : cs) {
    const auto i = static_cast<std::size_t>(job);
    const JobSpec& spec = specs_[i];
    JobState& st = states_[i];
    last_cs_[i] = value;
    const double throughput = spec.ideal_throughput / value;
    const double pay = std::min(penalty_due_[i], dt);
    if (pay > 0.0) {
      st = advance(spec, st, now_, pay, 0.0);
      penalty_due_[i] -= pay;
    }
    const double before = st.samples_done;
    st = advance(spec, st, now_ + pay, dt - pay, throughput);
    rec.work_done += st.samples_done - before;
    rec.work_capacity += throughput * (dt - pay);
    const double held = st.phase == JobPhase::Finished ? *st.finish_time - now_ : dt;
    cs_time_[i] += value * held;
    held_time_[i] += held;
    if (st.phase == JobPhase::Finished) finished.push_back(job);
  }
  for (JobId job : finished) {
    cluster_.release(job);
    states_[static_cast<std::size_t>(job)].placement.reset();
  }
  rec.finished = static_cast<int>(finished.size());

  if (std::isfinite(config_.cs_preemption_threshold)) {
    // One at a time: evicting a job can relieve the others it contended with.
    for (;;) {
      JobId victim = kNoJob;
      double worst = config_.cs_preemption_threshold;
      for (const auto& [job, value] : running_cs()) {
        if (value <= config_.cs_preemption_threshold) continue;
        const auto i = static_cast<std::size_t>(job);
        bool take = victim == kNoJob || value > worst;
        if (!take && value == worst) {
          const double a = *states_[i].start_time;
          const double b = *states_[static_cast<std::size_t>(victim)].start_time;
          take = a > b || (a == b && job > victim);
        }
        if (take) {
          victim = job;
          worst = value;
        }
      }
      if (victim == kNoJob) break;
      preempt(victim);
    }
  }
  rec.preempted = preempted_this_round_;

  rounds_.push_back(rec);
  now_ = static_cast<double>(rounds_.size()) * dt;
  return rounds_.back();
}

EpisodeReport Episode::report(std::string policy_name) const {
  EpisodeReport r;
  r.policy = std::move(policy_name);
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const JobState& st = states_[i];
    if (st.phase != JobPhase::Finished) continue;
    JobRecord j;
    j.id = specs_[i].id;
    j.model = specs_[i].model_class;
    j.demand = specs_[i].gpu_demand;
    j.arrival = specs_[i].arrival_time;
    j.start = *st.start_time;
    j.finish = *st.finish_time;
    j.jct = j.finish - j.arrival;
    j.isolated_runtime = specs_[i].isolated_runtime();
    j.preemptions = st.preemption_count;
    j.mean_cs = held_time_[i] > 0.0 ? cs_time_[i] / held_time_[i] : 1.0;
    r.jobs.push_back(j);
  }
  r.rounds = rounds_;
  r.warnings = warnings_;
  r.summary = summarize(r.jobs, r.rounds, forced_);
  return r;
}

Action decide(const PolicyHandle& policy, const Episode& episode, DecisionMode mode, std::mt19937_64* rng) {
  const SchedulingView view = episode.view();
  switch (policy.kind) {
    case PolicyKind::FifoGreedy: return decide_fifo_greedy(view);
    case PolicyKind::Las: return decide_las(view);
    case PolicyKind::Srtf: return decide_srtf(view, episode.config().srtf_preemptive);
    case PolicyKind::RlBase:
    case PolicyKind::RlHybrid: break;
  }
  if (policy.net == nullptr) throw UsageError(std::string(to_string(policy.kind)) + " requires a policy checkpoint");
  const CandidateSet candidates = episode.candidates();
  const ActionSpace space = ActionSpace::for_cluster(episode.cluster().config(), policy.net->architecture().heads);
  if (!has_placement_choice(space, episode.cluster(), candidates))
    return policy.kind == PolicyKind::RlHybrid ? decide_fifo_greedy(view) : Action{};
  const StateTensor state = episode.observe(candidates);
  if (policy.kind == PolicyKind::RlBase)
    return decide_rl_base(*policy.net, state, episode.cluster(), candidates, mode, rng).action;
  return decide_rl_hybrid(*policy.net, state, candidates, view, mode, rng);
}

EpisodeReport run_episode(const PolicyHandle& policy, std::vector<JobSpec> trace, const EpisodeConfig& config,
                          const ClusterConfig& cluster) {
  if (is_rl(policy.kind) && policy.net == nullptr)
    throw UsageError(std::string(to_string(policy.kind)) + " requires a policy checkpoint");
  Episode episode(std::move(trace), config, cluster);
  while (!episode.done()) {
    episode.begin_round();
    episode.apply(decide(policy, episode));
    episode.finish_round();
  }
  return episode.report(policy.label());
}

double percent_delta(double base, double other) {
  if (base == other) return 0.0;
  return (other - base) / base * 100.0;
}

ComparisonReport compare_policies(const std::vector<PolicyHandle>& policies,
                                  const std::vector<std::vector<JobSpec>>& traces, const EpisodeConfig& config,
                                  const ClusterConfig& cluster) {
  ComparisonReport out;
  for (const PolicyHandle& p : policies) {
    PolicyAggregate agg;
    agg.name = p.label();
    for (const auto& trace : traces) {
      agg.episodes.push_back(run_episode(p, trace, config, cluster));
      const EpisodeSummary& s = agg.episodes.back().summary;
      agg.avg_jct += s.avg_jct;
      agg.p90_jct += s.p90_jct;
      agg.mean_utilization += s.mean_utilization;
      agg.mean_cs += s.mean_cs;
    }
    if (!traces.empty()) {
      const double n = static_cast<double>(traces.size());
      agg.avg_jct /= n, agg.p90_jct /= n, agg.mean_utilization /= n, agg.mean_cs /= n;
    }
    out.policies.push_back(std::move(agg));
  }
  for (const auto& a : out.policies)
    for (const auto& b : out.policies) {
      if (&a == &b) continue;
      out.deltas.push_back({a.name, b.name, percent_delta(a.avg_jct, b.avg_jct), percent_delta(a.p90_jct, b.p90_jct),
                            percent_delta(a.mean_utilization, b.mean_utilization),
                            percent_delta(a.mean_cs, b.mean_cs)});
    }
  return out;
}

}  // namespace csched
