#include "csched/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "csched/agent.hpp"
#include "csched/checkpoint.hpp"
#include "csched/contention.hpp"
#include "csched/engine.hpp"
#include "csched/error.hpp"
#include "csched/report.hpp"
#include "csched/trainer.hpp"
#include "csched/workload.hpp"

namespace csched {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string out_root = "out";
  std::uint64_t seed = 0;
  int nodes = 4;
  int gpus_per_node = 8;
  double inter_bw = 900.0;
  double intra_bw = 16000.0;
  std::string cs_table;
  bool table_default = false;
  bool no_contention = false;
  double interval = 1.0;
  double threshold = 2.0;
  bool no_preemption = false;
  double restore_penalty = 5.0;
  int livelock_rounds = 10;
  bool non_preemptive_srtf = false;
  int k = 3;

  ClusterConfig cluster() const {
    ClusterConfig c{nodes, gpus_per_node, inter_bw, intra_bw};
    try {
      c.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return c;
  }

  ContentionParams contention() const {
    if (no_contention) return ContentionParams::disabled();
    if (!cs_table.empty())
      return ContentionParams::with_table(std::make_shared<const CSTable>(load_cs_table(cs_table)));
    if (table_default) return ContentionParams::with_table(default_cs_table());
    return ContentionParams::synthetic();
  }

  EpisodeConfig episode(const RewardWeights& weights) const {
    EpisodeConfig e;
    e.interval = interval;
    e.cs_preemption_threshold = no_preemption ? kNoPreemption : threshold;
    e.restore_penalty = restore_penalty;
    e.contention = contention();
    e.seed = seed;
    e.weights = weights;
    e.livelock_rounds = livelock_rounds;
    e.srtf_preemptive = !non_preemptive_srtf;
    e.candidates = k;
    try {
      e.validate();
    } catch (const ConfigError& err) {
      throw UsageError(err.what());
    }
    return e;
  }

  Provenance provenance(const std::string& command) const {
    std::string mode = no_contention ? "disabled" : !cs_table.empty() ? "table:" + cs_table
                                                    : table_default   ? "table:builtin"
                                                                      : "synthetic";
    return {{"command", command},
            {"seed", std::to_string(seed)},
            {"nodes", std::to_string(nodes)},
            {"gpus_per_node", std::to_string(gpus_per_node)},
            {"inter_bw", format_double(inter_bw)},
            {"intra_bw", format_double(intra_bw)},
            {"contention", mode},
            {"interval", format_double(interval)},
            {"preemption_threshold", no_preemption ? "off" : format_double(threshold)},
            {"restore_penalty", format_double(restore_penalty)},
            {"livelock_rounds", std::to_string(livelock_rounds)},
            {"srtf_preemptive", non_preemptive_srtf ? "false" : "true"},
            {"k", std::to_string(k)}};
  }
};

// Where jobs come from: explicit trace files or generated job sets.
struct TraceSource {
  std::vector<std::string> paths;
  std::string mix = "normal";
  int jobs = 256;
  int sets = 1;
  std::string arrival = "batch";
  double rate = 0.1;

  void add(CLI::App* cmd, int default_jobs, int default_sets) {
    jobs = default_jobs;
    sets = default_sets;
    cmd->add_option("--trace", paths, "Trace file(s); otherwise job sets are generated");
    cmd->add_option("--mix", mix, "Model mix for generated job sets (normal, heavy, medium, low)");
    cmd->add_option("--jobs", jobs, "Jobs per generated set");
    cmd->add_option("--sets", sets, "Number of generated job sets");
    cmd->add_option("--arrival", arrival, "Arrival process for generated sets (batch, poisson)");
    cmd->add_option("--rate", rate, "Poisson arrival rate, jobs per second");
  }

  struct Loaded {
    std::string id;
    std::vector<JobSpec> jobs;
  };

  std::vector<Loaded> load(std::uint64_t seed, const ClusterConfig& cluster) const {
    std::vector<Loaded> out;
    if (!paths.empty()) {
      for (const std::string& p : paths) {
        if (!fs::exists(p)) throw FileError("trace file '" + p + "' does not exist");
        out.push_back({fs::path(p).filename().string(), load_trace(p).jobs});
      }
      return out;
    }
    if (sets < 1) throw UsageError("--sets must be >= 1");
    for (int i = 0; i < sets; ++i) {
      const TraceSpec spec = make_spec(seed + static_cast<std::uint64_t>(i));
      out.push_back({mix + "-" + std::to_string(jobs) + "-s" + std::to_string(spec.seed), generate_trace(spec, cluster)});
    }
    return out;
  }

  TraceSpec make_spec(std::uint64_t seed) const {
    const auto m = named_mix(mix);
    if (!m) {
      std::string names;
      for (const auto& n : mix_names()) names += (names.empty() ? "" : ", ") + n;
      throw UsageError("unknown mix '" + mix + "' (valid: " + names + ")");
    }
    if (jobs < 1) throw UsageError("--jobs must be >= 1");
    TraceSpec spec;
    spec.mix = *m;
    spec.num_jobs = jobs;
    spec.seed = seed;
    if (arrival == "batch") spec.arrival = ArrivalProcess::Batch;
    else if (arrival == "poisson") spec.arrival = ArrivalProcess::Poisson;
    else throw UsageError("unknown arrival process '" + arrival + "' (valid: batch, poisson)");
    spec.arrival_rate = rate;
    try {
      spec.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    return spec;
  }

  void describe(Provenance& p) const {
    if (!paths.empty()) {
      std::string joined;
      for (const auto& s : paths) joined += (joined.empty() ? "" : ",") + s;
      p.emplace_back("traces", joined);
    } else {
      p.emplace_back("mix", mix);
      p.emplace_back("jobs", std::to_string(jobs));
      p.emplace_back("sets", std::to_string(sets));
      p.emplace_back("arrival", arrival);
      if (arrival == "poisson") p.emplace_back("rate", format_double(rate));
    }
  }
};

struct WeightOptions {
  std::string branch;
  double w1 = 0.0, w2 = 0.0;
  CLI::Option* w1_opt = nullptr;
  CLI::Option* w2_opt = nullptr;

  void add(CLI::App* cmd) {
    cmd->add_option("--branch", branch, "Reward weight preset A..E (w1 = 0.3 .. 0.7)");
    w1_opt = cmd->add_option("--w1", w1, "Weight on the contention term");
    w2_opt = cmd->add_option("--w2", w2, "Weight on the utilisation term (must equal 1 - w1)");
  }

  RewardWeights resolve() const {
    std::optional<RewardWeights> out;
    if (!branch.empty()) {
      out = branch.size() == 1 ? RewardWeights::branch(branch[0]) : std::nullopt;
      if (!out) throw UsageError("unknown branch '" + branch + "' (valid: A, B, C, D, E)");
    }
    try {
      const bool has1 = w1_opt->count() > 0, has2 = w2_opt->count() > 0;
      if (has1 || has2) {
        const RewardWeights explicit_w = has1 && has2 ? RewardWeights::from_pair(w1, w2)
                                         : has1       ? RewardWeights::from_pair(w1, 1.0 - w1)
                                                      : RewardWeights::from_pair(1.0 - w2, w2);
        if (out && std::abs(out->w1 - explicit_w.w1) > 1e-12)
          throw UsageError("--branch " + branch + " conflicts with the given weights");
        out = explicit_w;
      }
    } catch (const ConfigError& e) {
      throw UsageError(std::string("invalid reward weights: ") + e.what());
    }
    return out.value_or(RewardWeights{});
  }
};

void add_common(CLI::App& app, Common& c) {
  app.add_option("--out", c.out_root, "Output root directory")->envname(kOutputRootEnv);
  app.add_option("--seed", c.seed, "Seed for trace generation, training and evaluation");
  app.add_option("--nodes", c.nodes, "Nodes in the cluster");
  app.add_option("--gpus-per-node", c.gpus_per_node, "GPUs per node");
  app.add_option("--inter-bw", c.inter_bw, "Inter-node bandwidth per node, MB/s");
  app.add_option("--intra-bw", c.intra_bw, "Intra-node bandwidth per node, MB/s");
  app.add_option("--cs-table", c.cs_table, "Contention-sensitivity table file (table mode)");
  app.add_flag("--table", c.table_default, "Use the built-in contention-sensitivity table");
  app.add_flag("--no-contention", c.no_contention, "Force CS = 1 for every job");
  app.add_option("--interval", c.interval, "Scheduling interval T, simulated seconds");
  app.add_option("--preempt-threshold", c.threshold, "Preempt running jobs whose CS exceeds this");
  app.add_flag("--no-preemption", c.no_preemption, "Disable threshold preemption");
  app.add_option("--restore-penalty", c.restore_penalty, "Seconds a resumed job spends restoring");
  app.add_option("--livelock-rounds", c.livelock_rounds, "Idle rounds before a forced greedy placement");
  app.add_flag("--non-preemptive-srtf", c.non_preemptive_srtf, "SRTF never evicts running jobs");
  app.add_option("-k,--candidates", c.k, "Candidate jobs per RL decision");
}

class Manifest {
 public:
  Manifest(fs::path dir, Provenance provenance) : dir_(std::move(dir)), provenance_(std::move(provenance)) {
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) {
    files_.push_back(name);
    return (dir_ / name).string();
  }
  void add(const std::string& name) { files_.push_back(name); }
  const Provenance& provenance() const { return provenance_; }
  const fs::path& dir() const { return dir_; }
  void write() const {
    auto out = open_output((dir_ / "manifest.txt").string());
    write_provenance(out, provenance_);
    for (const auto& f : files_) out << "file=" << f << '\n';
  }

 private:
  fs::path dir_;
  Provenance provenance_;
  std::vector<std::string> files_;
};

PolicyNetd load_policy(const std::string& path, const ClusterConfig& cluster, int k) {
  if (path.empty()) throw UsageError("RL policies need --checkpoint");
  if (!fs::exists(path)) throw FileError("checkpoint '" + path + "' does not exist");
  Checkpoint ck = load_checkpoint(path);
  const ActionSpace space = ActionSpace::for_cluster(cluster, k);
  const NetArchitecture expected = space.architecture(ck.policy.architecture().hidden);
  if (!(ck.policy.architecture() == expected))
    throw LoadError("checkpoint architecture (" + ck.policy.architecture().describe() +
                    ") does not match this configuration (" + expected.describe() + ")");
  return std::move(ck.policy);
}

PolicyKind parse_kind(const std::string& name) {
  const auto k = parse_policy_kind(name);
  if (!k) throw UsageError("unknown policy '" + name + "' (valid: greedy, las, srtf, rl-base, rl-hybrid)");
  return *k;
}

int cmd_gen_trace(const Common& c, const TraceSource& src, const std::string& output) {
  const ClusterConfig cluster = c.cluster();
  const TraceSpec spec = src.make_spec(c.seed);
  const std::string path = !output.empty() ? output
                                           : (fs::path(c.out_root) / "traces" /
                                              (src.mix + "-" + std::to_string(src.jobs) + "-s" +
                                               std::to_string(c.seed) + ".trace"))
                                                 .string();
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  save_trace(path, Trace{spec, generate_trace(spec, cluster)});
  std::cout << path << '\n';
  return kExitOk;
}

struct TrainOptions {
  int episodes = 20;
  double lr = 1e-3;
  double discount = 0.99;
  double entropy = 0.01;
  int hidden = 256;
  int update_every = 32;
  std::string checkpoint;
  std::string id;
};

int cmd_train(const Common& c, TraceSource src, const WeightOptions& wopts, const TrainOptions& t) {
  const RewardWeights weights = wopts.resolve();
  const ClusterConfig cluster = c.cluster();
  if (src.paths.size() > 1) throw UsageError("train takes a single --trace");
  src.sets = 1;
  const auto traces = src.load(c.seed, cluster);

  TrainConfig cfg;
  cfg.episodes = t.episodes;
  cfg.learning_rate = t.lr;
  cfg.discount = t.discount;
  cfg.entropy_coef = t.entropy;
  cfg.hidden = t.hidden;
  cfg.update_every = t.update_every;
  cfg.seed = c.seed;
  cfg.episode = c.episode(weights);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  const std::string tag = wopts.branch.empty() ? "w1-" + format_double(weights.w1) : wopts.branch;
  const std::string id = t.id.empty() ? "train-" + tag + "-s" + std::to_string(c.seed) : t.id;
  cfg.checkpoint_path =
      t.checkpoint.empty() ? (fs::path(c.out_root) / "checkpoints" / (id + ".ckpt")).string() : t.checkpoint;
  if (fs::path(cfg.checkpoint_path).has_parent_path())
    fs::create_directories(fs::path(cfg.checkpoint_path).parent_path());

  Provenance prov = c.provenance("train");
  src.describe(prov);
  prov.insert(prov.end(), {{"w1", format_double(weights.w1)},
                           {"w2", format_double(weights.w2())},
                           {"episodes", std::to_string(cfg.episodes)},
                           {"lr", format_double(cfg.learning_rate)},
                           {"discount", format_double(cfg.discount)},
                           {"entropy", format_double(cfg.entropy_coef)},
                           {"hidden", std::to_string(cfg.hidden)},
                           {"update_every", std::to_string(cfg.update_every)},
                           {"checkpoint", cfg.checkpoint_path}});

  const TrainResult result = train(traces.front().jobs, cfg, cluster, traces.front().id);

  Manifest manifest(fs::path(c.out_root) / "reports" / id, prov);
  {
    auto f = open_output(manifest.path("training_curve.csv"));
    write_training_curve(f, result.curve, prov);
  }
  manifest.write();
  std::cout << cfg.checkpoint_path << '\n';
  return kExitOk;
}

struct EvalOptions {
  std::string policy;
  std::string checkpoint;
  std::string id;
  int dump_state_round = -1;
};

EpisodeReport eval_with_dump(const PolicyHandle& handle, std::vector<JobSpec> jobs, const EpisodeConfig& cfg,
                             const ClusterConfig& cluster, int dump_round, const std::string& dump_path) {
  Episode episode(std::move(jobs), cfg, cluster);
  while (!episode.done()) {
    episode.begin_round();
    if (episode.round_index() == dump_round) {
      auto f = open_output(dump_path);
      write_state_csv(f, episode.observe(episode.candidates()));
    }
    episode.apply(decide(handle, episode));
    episode.finish_round();
  }
  return episode.report(handle.label());
}

int cmd_eval(const Common& c, const TraceSource& src, const EvalOptions& o) {
  const ClusterConfig cluster = c.cluster();
  const PolicyKind kind = parse_kind(o.policy);
  std::optional<PolicyNetd> net;
  if (is_rl(kind)) net = load_policy(o.checkpoint, cluster, c.k);
  const EpisodeConfig cfg = c.episode(RewardWeights{});
  const auto traces = src.load(c.seed, cluster);

  Provenance prov = c.provenance("eval");
  src.describe(prov);
  prov.emplace_back("policy", o.policy);
  if (net) prov.emplace_back("checkpoint", o.checkpoint);
  const std::string id = o.id.empty() ? "eval-" + o.policy + "-s" + std::to_string(c.seed) : o.id;
  Manifest manifest(fs::path(c.out_root) / "reports" / id, prov);

  const PolicyHandle handle{kind, net ? &*net : nullptr, ""};
  double avg = 0.0, p90 = 0.0, util = 0.0, cs = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string prefix = "set" + std::to_string(i) + "-";
    Provenance p = prov;
    p.emplace_back("trace_id", traces[i].id);
    const bool dump = i == 0 && o.dump_state_round >= 0;
    const std::string dump_name = "state-round" + std::to_string(o.dump_state_round) + ".csv";
    const EpisodeReport report =
        dump ? eval_with_dump(handle, traces[i].jobs, cfg, cluster, o.dump_state_round, manifest.path(dump_name))
             : run_episode(handle, traces[i].jobs, cfg, cluster);
    write_episode_files(manifest.dir().string(), prefix, report, p);
    for (const char* f : {"jobs.csv", "rounds.csv", "summary.txt", "jct_cdf.dat", "util_hist.dat", "cs_hist.dat"})
      manifest.add(prefix + f);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    avg += report.summary.avg_jct, p90 += report.summary.p90_jct;
    util += report.summary.mean_utilization, cs += report.summary.mean_cs;
  }
  const double n = std::max<std::size_t>(1, traces.size());
  {
    auto f = open_output(manifest.path("eval_summary.txt"));
    write_provenance(f, prov);
    f << "sets=" << traces.size() << "\navg_jct=" << format_double(avg / n) << "\np90_jct=" << format_double(p90 / n)
      << "\nmean_utilization=" << format_double(util / n) << "\nmean_cs=" << format_double(cs / n) << '\n';
  }
  manifest.write();
  std::cout << manifest.dir().string() << '\n';
  return kExitOk;
}

struct CompareOptions {
  std::vector<std::string> policies;
  std::string checkpoint;
  std::vector<std::string> branch_checkpoints;  // "A=path"
  std::string id;
};

int cmd_compare(const Common& c, const TraceSource& src, const CompareOptions& o) {
  const ClusterConfig cluster = c.cluster();
  if (o.policies.size() < 2) throw UsageError("compare needs at least two --policy values");
  std::vector<PolicyKind> kinds;
  for (const auto& p : o.policies) kinds.push_back(parse_kind(p));
  std::optional<PolicyNetd> net;
  for (PolicyKind k : kinds)
    if (is_rl(k) && !net) net = load_policy(o.checkpoint, cluster, c.k);

  std::vector<std::pair<char, PolicyNetd>> branch_nets;
  for (const std::string& spec : o.branch_checkpoints) {
    if (spec.size() < 3 || spec[1] != '=' || !RewardWeights::branch(spec[0]))
      throw UsageError("--branch-checkpoint expects B=path with B in A..E, got '" + spec + "'");
    branch_nets.emplace_back(spec[0], load_policy(spec.substr(2), cluster, c.k));
  }

  const EpisodeConfig cfg = c.episode(RewardWeights{});
  const auto traces = src.load(c.seed, cluster);
  std::vector<std::vector<JobSpec>> sets;
  for (const auto& t : traces) sets.push_back(t.jobs);

  Provenance prov = c.provenance("compare");
  src.describe(prov);
  std::string joined;
  for (const auto& p : o.policies) joined += (joined.empty() ? "" : ",") + p;
  prov.emplace_back("policies", joined);
  if (net) prov.emplace_back("checkpoint", o.checkpoint);
  for (const auto& s : o.branch_checkpoints) prov.emplace_back("branch_checkpoint", s);
  const std::string id = o.id.empty() ? "compare-s" + std::to_string(c.seed) : o.id;
  Manifest manifest(fs::path(c.out_root) / "reports" / id, prov);

  // Same label twice would make the deltas unreadable; number repeats.
  std::vector<PolicyHandle> handles;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    std::string label(to_string(kinds[i]));
    int seen = 0;
    for (std::size_t j = 0; j < i; ++j) seen += kinds[j] == kinds[i];
    if (seen > 0) label += "#" + std::to_string(seen + 1);
    handles.push_back({kinds[i], is_rl(kinds[i]) ? &*net : nullptr, label});
  }
  const ComparisonReport comparison = compare_policies(handles, sets, cfg, cluster);
  {
    auto f = open_output(manifest.path("comparison.txt"));
    write_comparison(f, comparison, prov);
  }
  for (const PolicyAggregate& agg : comparison.policies)
    for (std::size_t i = 0; i < agg.episodes.size(); ++i) {
      const std::string prefix = agg.name + "-set" + std::to_string(i) + "-";
      Provenance p = prov;
      p.emplace_back("policy", agg.name);
      p.emplace_back("trace_id", traces[i].id);
      write_episode_files(manifest.dir().string(), prefix, agg.episodes[i], p);
      for (const char* f : {"jobs.csv", "rounds.csv", "summary.txt", "jct_cdf.dat", "util_hist.dat", "cs_hist.dat"})
        manifest.add(prefix + f);
    }

  if (!branch_nets.empty()) {
    std::vector<ScatterPoint> points;
    for (const auto& [branch, bnet] : branch_nets)
      for (PolicyKind kind : {PolicyKind::RlBase, PolicyKind::RlHybrid}) {
        const auto r = compare_policies({PolicyHandle{kind, &bnet, ""}}, sets, cfg, cluster);
        const PolicyAggregate& a = r.policies.front();
        points.push_back({std::string(to_string(kind)), branch, a.avg_jct, a.mean_utilization, a.mean_cs});
      }
    auto f = open_output(manifest.path("scatter.csv"));
    write_scatter(f, points, prov);
  }
  manifest.write();
  std::cout << manifest.dir().string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Contention-aware GPU cluster scheduling simulator"};
  app.name("csched");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");

  Common common;
  add_common(app, common);

  TraceSource gen_src, train_src, eval_src, cmp_src;
  std::string gen_output;
  auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic job trace");
  gen->add_option("--mix", gen_src.mix, "Model mix: normal, heavy, medium, low");
  gen->add_option("--jobs", gen_src.jobs, "Number of jobs");
  gen->add_option("--arrival", gen_src.arrival, "Arrival process: batch, poisson");
  gen->add_option("--rate", gen_src.rate, "Poisson arrival rate, jobs per second");
  gen->add_option("-o,--output", gen_output, "Trace path (default <out>/traces/<mix>-<jobs>-s<seed>.trace)");

  WeightOptions weights;
  TrainOptions topts;
  auto* tr = app.add_subcommand("train", "Train an RL policy and write a checkpoint");
  train_src.add(tr, 64, 1);
  weights.add(tr);
  tr->add_option("--episodes", topts.episodes, "Training episodes");
  tr->add_option("--lr", topts.lr, "Learning rate");
  tr->add_option("--discount", topts.discount, "Per-round discount factor");
  tr->add_option("--entropy", topts.entropy, "Entropy bonus coefficient");
  tr->add_option("--hidden", topts.hidden, "Hidden layer width");
  tr->add_option("--update-every", topts.update_every, "Decision steps per update (0 = once per episode)");
  tr->add_option("--checkpoint", topts.checkpoint, "Checkpoint path (default <out>/checkpoints/<id>.ckpt)");
  tr->add_option("--id", topts.id, "Experiment id");

  EvalOptions eopts;
  auto* ev = app.add_subcommand("eval", "Run one policy over one or more job sets");
  eval_src.add(ev, 256, 10);
  ev->add_option("--policy", eopts.policy, "greedy, las, srtf, rl-base, rl-hybrid")->required();
  ev->add_option("--checkpoint", eopts.checkpoint, "Policy checkpoint for RL policies");
  ev->add_option("--id", eopts.id, "Experiment id");
  ev->add_option("--dump-state-round", eopts.dump_state_round, "Write the encoded state of this round (first set)");

  CompareOptions copts;
  auto* cmp = app.add_subcommand("compare", "Compare policies over the same job sets");
  cmp_src.add(cmp, 256, 10);
  cmp->add_option("--policy", copts.policies, "Policies to compare (at least two)");
  cmp->add_option("--checkpoint", copts.checkpoint, "Policy checkpoint for RL policies");
  cmp->add_option("--branch-checkpoint", copts.branch_checkpoints,
                  "B=path per reward branch; adds RL-base/RL-Hybrid scatter points");
  cmp->add_option("--id", copts.id, "Experiment id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFile;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_trace(common, gen_src, gen_output);
    if (tr->parsed()) return cmd_train(common, train_src, weights, topts);
    if (ev->parsed()) return cmd_eval(common, eval_src, eopts);
    if (cmp->parsed()) return cmd_compare(common, cmp_src, copts);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FileError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitFile;
  } catch (const ParseError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitFile;
  } catch (const LoadError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitFile;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitFile;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace csched
