#pragma once

#include <fstream>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "csched/engine.hpp"
#include "csched/trainer.hpp"

namespace csched {

// Resolved configuration written as "# key=value" lines at the top of every file.
using Provenance = std::vector<std::pair<std::string, std::string>>;

void write_provenance(std::ostream& out, const Provenance& provenance);

// id,model,demand,arrival,start,finish,jct,isolated_runtime,preemptions,mean_cs
void write_jobs_csv(std::ostream& out, const EpisodeReport& report, const Provenance& provenance);
// round,time,utilization,mean_cs,reward,running,queued,placed,preempted,finished
void write_rounds_csv(std::ostream& out, const EpisodeReport& report, const Provenance& provenance);
// key=value aggregates, warnings as "warning=" lines.
void write_summary(std::ostream& out, const EpisodeReport& report, const Provenance& provenance);
// Whitespace-separated (x, y) points.
void write_jct_cdf(std::ostream& out, const EpisodeSummary& summary, const Provenance& provenance);
void write_utilization_histogram(std::ostream& out, const EpisodeSummary& summary, const Provenance& provenance);
void write_cs_histogram(std::ostream& out, const EpisodeSummary& summary, const Provenance& provenance);

// Writes the six files above into `dir` with the given file prefix.
void write_episode_files(const std::string& dir, const std::string& prefix, const EpisodeReport& report,
                         const Provenance& provenance);

// Per-policy aggregates, pairwise deltas and published full-scale reference lines.
void write_comparison(std::ostream& out, const ComparisonReport& comparison, const Provenance& provenance);

// episode,mean_reward,mean_cs,mean_utilization,avg_jct,decisions,updates,forced
void write_training_curve(std::ostream& out, const std::vector<TrainCurvePoint>& curve,
                          const Provenance& provenance);

struct ScatterPoint {
  std::string variant;  // rl-base or rl-hybrid
  char branch = 'A';
  double avg_jct = 0.0;
  double mean_utilization = 0.0;
  double mean_cs = 0.0;
};
void write_scatter(std::ostream& out, const std::vector<ScatterPoint>& points, const Provenance& provenance);

// Opens for writing, throwing FileError on failure.
std::ofstream open_output(const std::string& path);

}  // namespace csched
