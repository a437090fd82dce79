#include "csched/report.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "csched/error.hpp"

namespace csched {

namespace {

std::string num(double v) { return format_double(v); }

}  // namespace

void write_provenance(std::ostream& out, const Provenance& provenance) {
  for (const auto& [k, v] : provenance) out << "# " << k << '=' << v << '\n';
}

void write_jobs_csv(std::ostream& out, const EpisodeReport& report, const Provenance& provenance) {
  write_provenance(out, provenance);
  out << "id,model,demand,arrival,start,finish,jct,isolated_runtime,preemptions,mean_cs\n";
  for (const JobRecord& j : report.jobs)
    out << j.id << ',' << to_string(j.model) << ',' << j.demand << ',' << num(j.arrival) << ',' << num(j.start)
        << ',' << num(j.finish) << ',' << num(j.jct) << ',' << num(j.isolated_runtime) << ',' << j.preemptions
        << ',' << num(j.mean_cs) << '\n';
}

void write_rounds_csv(std::ostream& out, const EpisodeReport& report, const Provenance& provenance) {
  write_provenance(out, provenance);
  out << "round,time,utilization,mean_cs,reward,running,queued,placed,preempted,finished\n";
  for (const RoundRecord& r : report.rounds)
    out << r.index << ',' << num(r.time) << ',' << num(r.utilization) << ',' << num(r.mean_cs) << ','
        << num(r.reward) << ',' << r.running << ',' << r.queued << ',' << r.placed << ',' << r.preempted << ','
        << r.finished << '\n';
}

void write_summary(std::ostream& out, const EpisodeReport& report, const Provenance& provenance) {
  write_provenance(out, provenance);
  const EpisodeSummary& s = report.summary;
  out << "policy=" << report.policy << '\n'
      << "jobs=" << s.jobs << '\n'
      << "avg_jct=" << num(s.avg_jct) << '\n'
      << "p90_jct=" << num(s.p90_jct) << '\n'
      << "mean_utilization=" << num(s.mean_utilization) << '\n'
      << "mean_cs=" << num(s.mean_cs) << '\n'
      << "makespan=" << num(s.makespan) << '\n'
      << "rounds=" << s.rounds << '\n'
      << "preemptions=" << s.preemptions << '\n'
      << "forced_placements=" << s.forced_placements << '\n';
  for (const std::string& w : report.warnings) out << "warning=" << w << '\n';
}

void write_jct_cdf(std::ostream& out, const EpisodeSummary& summary, const Provenance& provenance) {
  write_provenance(out, provenance);
  out << "# jct fraction\n";
  for (const auto& [x, y] : summary.jct_cdf) out << num(x) << ' ' << num(y) << '\n';
}

void write_utilization_histogram(std::ostream& out, const EpisodeSummary& summary, const Provenance& provenance) {
  write_provenance(out, provenance);
  out << "# bin_low density\n";
  const double total = std::max(1, summary.rounds);
  for (int b = 0; b < kUtilizationBins; ++b)
    out << num(b / static_cast<double>(kUtilizationBins)) << ' '
        << num(summary.utilization_histogram[static_cast<std::size_t>(b)] / total) << '\n';
}

void write_cs_histogram(std::ostream& out, const EpisodeSummary& summary, const Provenance& provenance) {
  write_provenance(out, provenance);
  out << "# cs_bin_low proportion\n";
  const double total = std::max(1, summary.jobs);
  for (int b = 0; b < kCsHistogramBins; ++b)
    out << num(1.0 + b * kCsHistogramWidth) << ' ' << num(summary.cs_histogram[static_cast<std::size_t>(b)] / total)
        << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path);
  return out;
}

void write_episode_files(const std::string& dir, const std::string& prefix, const EpisodeReport& report,
                         const Provenance& provenance) {
  std::filesystem::create_directories(dir);
  const std::string base = (std::filesystem::path(dir) / prefix).string();
  {
    auto f = open_output(base + "jobs.csv");
    write_jobs_csv(f, report, provenance);
  }
  {
    auto f = open_output(base + "rounds.csv");
    write_rounds_csv(f, report, provenance);
  }
  {
    auto f = open_output(base + "summary.txt");
    write_summary(f, report, provenance);
  }
  {
    auto f = open_output(base + "jct_cdf.dat");
    write_jct_cdf(f, report.summary, provenance);
  }
  {
    auto f = open_output(base + "util_hist.dat");
    write_utilization_histogram(f, report.summary, provenance);
  }
  {
    auto f = open_output(base + "cs_hist.dat");
    write_cs_histogram(f, report.summary, provenance);
  }
}

void write_comparison(std::ostream& out, const ComparisonReport& comparison, const Provenance& provenance) {
  write_provenance(out, provenance);
  out << "[policies]\n";
  out << "policy,episodes,avg_jct,p90_jct,mean_utilization,mean_cs\n";
  for (const PolicyAggregate& p : comparison.policies)
    out << p.name << ',' << p.episodes.size() << ',' << num(p.avg_jct) << ',' << num(p.p90_jct) << ','
        << num(p.mean_utilization) << ',' << num(p.mean_cs) << '\n';
  out << "[deltas]\n";
  out << "base,other,avg_jct_pct,p90_jct_pct,mean_utilization_pct,mean_cs_pct\n";
  for (const MetricDelta& d : comparison.deltas)
    out << d.base << ',' << d.other << ',' << num(d.avg_jct) << ',' << num(d.p90_jct) << ','
        << num(d.mean_utilization) << ',' << num(d.mean_cs) << '\n';
  // Full-scale published numbers, for orientation only.
  out << "[reference]\n";
  out << "base,other,avg_jct_pct,p90_jct_pct\n";
  out << "srtf,rl-base,-15.4,-16.4\n";
  out << "las,rl-base,-18.2,-20.7\n";
}

void write_training_curve(std::ostream& out, const std::vector<TrainCurvePoint>& curve,
                          const Provenance& provenance) {
  write_provenance(out, provenance);
  out << "episode,mean_reward,mean_cs,mean_utilization,avg_jct,decisions,updates,forced\n";
  for (const TrainCurvePoint& p : curve)
    out << p.episode << ',' << num(p.mean_reward) << ',' << num(p.mean_cs) << ',' << num(p.mean_utilization) << ','
        << num(p.avg_jct) << ',' << p.decisions << ',' << p.updates << ',' << p.forced_placements << '\n';
}

void write_scatter(std::ostream& out, const std::vector<ScatterPoint>& points, const Provenance& provenance) {
  write_provenance(out, provenance);
  out << "variant,branch,avg_jct,mean_utilization,mean_cs\n";
  for (const ScatterPoint& p : points)
    out << p.variant << ',' << p.branch << ',' << num(p.avg_jct) << ',' << num(p.mean_utilization) << ','
        << num(p.mean_cs) << '\n';
}

}  // namespace csched
