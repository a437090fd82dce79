#include "csched/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "csched/error.hpp"

namespace csched {

void JobSpec::validate(const ClusterConfig& cluster) const {
  if (gpu_demand < 1 || gpu_demand > cluster.total_gpus())
    throw ValidationError("job " + std::to_string(id) + ": demand " + std::to_string(gpu_demand) +
                          " exceeds cluster capacity");
  if (!is_schedulable_demand(cluster, gpu_demand))
    throw ValidationError("job " + std::to_string(id) + ": demand " + std::to_string(gpu_demand) +
                          " has no j*2^i shape on this cluster");
  if (!(total_samples > 0.0)) throw ValidationError("job " + std::to_string(id) + ": total_samples must be > 0");
  if (!(ideal_throughput > 0.0)) throw ValidationError("job " + std::to_string(id) + ": throughput must be > 0");
  if (!(arrival_time >= 0.0)) throw ValidationError("job " + std::to_string(id) + ": negative arrival time");
  profile.validate();
}

std::string_view to_string(JobPhase phase) {
  switch (phase) {
    case JobPhase::Waiting: return "waiting";
    case JobPhase::Running: return "running";
    case JobPhase::Preempted: return "preempted";
    case JobPhase::Finished: return "finished";
  }
  return "?";
}

JobState JobState::submitted(const JobSpec& spec) {
  JobState s;
  s.submit_time = spec.arrival_time;
  return s;
}

JobState advance(const JobSpec& spec, JobState state, double now, double dt, double throughput) {
  if (state.phase != JobPhase::Running)
    throw StateError("cannot advance job " + std::to_string(spec.id) + " in phase " +
                     std::string(to_string(state.phase)));
  if (dt < 0.0 || throughput < 0.0) throw StateError("negative interval or throughput");
  if (dt == 0.0) return state;

  const double remaining = spec.total_samples - state.samples_done;
  const double gained = throughput * dt;
  if (throughput > 0.0 && gained >= remaining - 1e-12 * spec.total_samples) {
    const double crossing = std::min(dt, remaining / throughput);
    state.samples_done = spec.total_samples;
    state.attained_service += spec.gpu_demand * crossing;
    state.finish_time = now + crossing;
    state.phase = JobPhase::Finished;
    return state;
  }
  state.samples_done += gained;
  state.attained_service += spec.gpu_demand * dt;
  return state;
}

DemandSampler::DemandSampler(const ClusterConfig& cluster, int max_demand, std::uint64_t seed) : rng_(seed) {
  for (int d = 1; d <= std::min(max_demand, cluster.total_gpus()); ++d)
    if (is_schedulable_demand(cluster, d)) support_.push_back(d);
  if (support_.empty()) throw ConfigError("no schedulable GPU demand on this cluster");
  pick_ = std::uniform_int_distribution<std::size_t>(0, support_.size() - 1);
}

DemandSampler demand_distribution(std::uint64_t seed, const ClusterConfig& cluster, int max_demand) {
  return DemandSampler(cluster, max_demand, seed);
}

void TraceSpec::validate() const {
  for (double r : mix)
    if (!(r > 0.0)) throw ValidationError("mix ratios must be positive");
  if (num_jobs < 1) throw ValidationError("num_jobs must be >= 1");
  if (!(isolated_runtime > 0.0)) throw ValidationError("isolated_runtime must be > 0");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw ValidationError("jitter must lie in [0, 1)");
  if (!(gpu_throughput > 0.0)) throw ValidationError("gpu_throughput must be > 0");
  if (arrival == ArrivalProcess::Poisson && !(arrival_rate > 0.0))
    throw ValidationError("arrival_rate must be > 0");
  if (max_demand < 1) throw ValidationError("max_demand must be >= 1");
}

namespace {

const std::map<std::string, std::array<double, kNumModelClasses>, std::less<>>& mixes() {
  static const std::map<std::string, std::array<double, kNumModelClasses>, std::less<>> m = {
      {"normal", {1, 1, 1, 1, 1, 1}},
      {"heavy", {1, 1, 1, 1, 4, 4}},
      {"medium", {1, 1, 4, 4, 1, 1}},
      {"low", {4, 4, 1, 1, 1, 1}},
  };
  return m;
}

}  // namespace

std::optional<std::array<double, kNumModelClasses>> named_mix(std::string_view name) {
  auto it = mixes().find(name);
  if (it == mixes().end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> mix_names() { return {"normal", "heavy", "medium", "low"}; }

std::vector<JobSpec> generate_trace(const TraceSpec& spec, const ClusterConfig& cluster) {
  spec.validate();
  cluster.validate();
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<int> model_dist(spec.mix.begin(), spec.mix.end());
  DemandSampler demand(cluster, spec.max_demand, spec.seed);
  std::uniform_real_distribution<double> jitter(1.0 - spec.jitter, 1.0 + spec.jitter);
  std::exponential_distribution<double> gap(spec.arrival == ArrivalProcess::Poisson ? spec.arrival_rate : 1.0);

  std::vector<JobSpec> jobs;
  jobs.reserve(static_cast<std::size_t>(spec.num_jobs));
  double clock = 0.0;
  for (int i = 0; i < spec.num_jobs; ++i) {
    JobSpec job;
    job.id = i;
    job.model_class = static_cast<ModelClass>(model_dist(rng));
    job.gpu_demand = demand(rng);
    job.profile = default_profile(job.model_class);
    job.profile.avg_bandwidth *= jitter(rng);
    job.profile.comm_comp_ratio *= jitter(rng);
    job.ideal_throughput = spec.gpu_throughput * job.gpu_demand;
    job.total_samples = job.ideal_throughput * spec.isolated_runtime;
    if (spec.arrival == ArrivalProcess::Poisson && i > 0) clock += gap(rng);
    job.arrival_time = clock;
    jobs.push_back(job);
  }
  return jobs;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", line);
  return v;
}

long long parse_int(const std::string& s, std::size_t line) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError("bad integer '" + s + "'", line);
  return v;
}

std::map<std::string, std::string> parse_fields(const std::string& text, std::size_t line) {
  std::map<std::string, std::string> fields;
  std::istringstream ss(text);
  for (std::string tok; ss >> tok;) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value, got '" + tok + "'", line);
    fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return fields;
}

const std::string& need(const std::map<std::string, std::string>& f, const std::string& key, std::size_t line) {
  auto it = f.find(key);
  if (it == f.end()) throw ParseError("missing field '" + key + "'", line);
  return it->second;
}

std::string format_mix(const std::array<double, kNumModelClasses>& mix) {
  std::string out;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (i) out += ':';
    out += format_double(mix[i]);
  }
  return out;
}

constexpr std::string_view kTraceMagic = "csched-trace";

}  // namespace

void write_trace(std::ostream& out, const Trace& trace) {
  if (trace.spec) {
    const TraceSpec& s = *trace.spec;
    out << "# " << kTraceMagic << " v1 mix=" << format_mix(s.mix) << " num_jobs=" << s.num_jobs
        << " seed=" << s.seed << " arrival=" << (s.arrival == ArrivalProcess::Batch ? "batch" : "poisson")
        << " arrival_rate=" << format_double(s.arrival_rate)
        << " isolated_runtime=" << format_double(s.isolated_runtime) << " jitter=" << format_double(s.jitter)
        << " gpu_throughput=" << format_double(s.gpu_throughput) << " max_demand=" << s.max_demand << '\n';
  } else {
    out << "# " << kTraceMagic << " v1\n";
  }
  for (const JobSpec& j : trace.jobs) {
    out << "id=" << j.id << " model=" << to_string(j.model_class) << " demand=" << j.gpu_demand
        << " samples=" << format_double(j.total_samples) << " arrival=" << format_double(j.arrival_time)
        << " throughput=" << format_double(j.ideal_throughput)
        << " bandwidth=" << format_double(j.profile.avg_bandwidth)
        << " comm_comp=" << format_double(j.profile.comm_comp_ratio) << '\n';
  }
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.empty()) continue;
    if (raw[0] == '#') {
      std::istringstream ss(raw.substr(1));
      std::string magic, version;
      ss >> magic >> version;
      if (magic != kTraceMagic) continue;
      std::string rest;
      std::getline(ss, rest);
      auto f = parse_fields(rest, line_no);
      if (!f.count("mix")) continue;
      TraceSpec s;
      std::istringstream mix(need(f, "mix", line_no));
      std::size_t k = 0;
      for (std::string part; std::getline(mix, part, ':');) {
        if (k >= s.mix.size()) throw ParseError("mix has too many ratios", line_no);
        s.mix[k++] = parse_double(part, line_no);
      }
      if (k != s.mix.size()) throw ParseError("mix needs six ratios", line_no);
      s.num_jobs = static_cast<int>(parse_int(need(f, "num_jobs", line_no), line_no));
      s.seed = static_cast<std::uint64_t>(parse_int(need(f, "seed", line_no), line_no));
      const std::string& arrival = need(f, "arrival", line_no);
      if (arrival != "batch" && arrival != "poisson") throw ParseError("unknown arrival '" + arrival + "'", line_no);
      s.arrival = arrival == "batch" ? ArrivalProcess::Batch : ArrivalProcess::Poisson;
      s.arrival_rate = parse_double(need(f, "arrival_rate", line_no), line_no);
      s.isolated_runtime = parse_double(need(f, "isolated_runtime", line_no), line_no);
      s.jitter = parse_double(need(f, "jitter", line_no), line_no);
      s.gpu_throughput = parse_double(need(f, "gpu_throughput", line_no), line_no);
      s.max_demand = static_cast<int>(parse_int(need(f, "max_demand", line_no), line_no));
      trace.spec = s;
      continue;
    }
    auto f = parse_fields(raw, line_no);
    JobSpec j;
    j.id = static_cast<JobId>(parse_int(need(f, "id", line_no), line_no));
    auto model = parse_model_class(need(f, "model", line_no));
    if (!model) throw ParseError("unknown model '" + need(f, "model", line_no) + "'", line_no);
    j.model_class = *model;
    j.gpu_demand = static_cast<int>(parse_int(need(f, "demand", line_no), line_no));
    j.total_samples = parse_double(need(f, "samples", line_no), line_no);
    j.arrival_time = parse_double(need(f, "arrival", line_no), line_no);
    j.ideal_throughput = parse_double(need(f, "throughput", line_no), line_no);
    j.profile = default_profile(j.model_class);
    j.profile.avg_bandwidth = parse_double(need(f, "bandwidth", line_no), line_no);
    j.profile.comm_comp_ratio = parse_double(need(f, "comm_comp", line_no), line_no);
    if (j.gpu_demand < 1 || !(j.total_samples > 0) || !(j.ideal_throughput > 0) || !(j.profile.avg_bandwidth > 0) ||
        !(j.profile.comm_comp_ratio > 0) || !(j.arrival_time >= 0))
      throw ParseError("field out of range", line_no);
    trace.jobs.push_back(j);
  }
  return trace;
}

void save_trace(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write trace '" + path + "'");
  write_trace(out, trace);
  if (!out) throw FileError("failed writing trace '" + path + "'");
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open trace '" + path + "'");
  return read_trace(in);
}

}  // namespace csched
