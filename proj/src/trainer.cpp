#include "csched/trainer.hpp"

#include <optional>
#include <random>

#include "csched/agent.hpp"
#include "csched/checkpoint.hpp"
#include "csched/error.hpp"

namespace csched {

void TrainConfig::validate() const {
  if (episodes < 1) throw ConfigError("training needs at least one episode");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must be in (0, 1]");
  if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0)) throw ConfigError("loss coefficients must be >= 0");
  if (!(max_grad_norm >= 0.0)) throw ConfigError("max grad norm must be >= 0");
  if (update_every < 0) throw ConfigError("update_every must be >= 0");
  if (hidden < 1) throw ConfigError("hidden width must be >= 1");
  episode.validate();
}

TrainResult train(const std::vector<JobSpec>& trace, const TrainConfig& config, const ClusterConfig& cluster,
                  const std::string& trace_id) {
  config.validate();
  const ActionSpace space = ActionSpace::for_cluster(cluster, config.episode.candidates);
  return train(PolicyNetd(space.architecture(config.hidden), config.seed), trace, config, cluster, trace_id);
}

TrainResult train(PolicyNetd initial, const std::vector<JobSpec>& trace, const TrainConfig& config,
                  const ClusterConfig& cluster, const std::string& trace_id) {
  config.validate();
  cluster.validate();
  const ActionSpace space = ActionSpace::for_cluster(cluster, config.episode.candidates);
  if (!(initial.architecture() == space.architecture(initial.architecture().hidden)))
    throw LoadError("policy architecture " + initial.architecture().describe() + " does not fit this cluster (" +
                    space.architecture(initial.architecture().hidden).describe() + ")");

  TrainResult result{std::move(initial), {}};
  PolicyNetd& net = result.policy;
  AdamAscent<double> optimiser(net.architecture(), config.learning_rate, config.max_grad_norm);
  const UpdateConfig update_config{{config.entropy_coef, config.value_coef}, true};
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  // Returns are kept on the scale of a single reward so the value head does not
  // have to chase a 1/(1-gamma) blow-up.
  const double reward_scale = config.discount < 1.0 ? 1.0 - config.discount : 1.0;

  for (int e = 0; e < config.episodes; ++e) {
    Episode episode(trace, config.episode, cluster);
    Trajectory segment;
    std::optional<TrajectoryStep> pending;
    double pending_discount = 1.0;
    TrainCurvePoint point;
    point.episode = e;
    int cs_rounds = 0;

    auto flush = [&](double bootstrap) {
      if (segment.empty()) return;
      segment.bootstrap_value = bootstrap;
      update(net, segment, update_config, optimiser);
      ++point.updates;
      segment.steps.clear();
    };

    while (!episode.done()) {
      episode.begin_round();
      const CandidateSet candidates = episode.candidates();
      Action action;
      if (has_placement_choice(space, episode.cluster(), candidates)) {
        const StateTensor state = episode.observe(candidates);
        if (pending) {
          pending->discount = pending_discount;
          segment.steps.push_back(std::move(*pending));
          pending.reset();
          if (config.update_every > 0 && static_cast<int>(segment.size()) >= config.update_every)
            flush(net.forward(state.flat()).value);
        }
        RlDecision d = decide_rl_base(net, state, episode.cluster(), candidates, DecisionMode::Sample, &rng);
        action = std::move(d.action);
        pending = TrajectoryStep{state.flat(), std::move(d.choices), std::move(d.masks), 0.0, 1.0};
        pending_discount = 1.0;
        ++point.decisions;
      }
      episode.apply(action);
      const RoundRecord& rec = episode.finish_round();
      if (pending) {
        pending->reward += pending_discount * reward_scale * rec.reward;
        pending_discount *= config.discount;
      }
      point.mean_reward += rec.reward;
      point.mean_utilization += rec.utilization;
      if (rec.running > 0) {
        point.mean_cs += rec.mean_cs;
        ++cs_rounds;
      }
    }
    if (pending) {
      pending->discount = pending_discount;
      segment.steps.push_back(std::move(*pending));
    }
    flush(0.0);

    const EpisodeReport report = episode.report("rl-base");
    const double rounds = std::max(1, report.summary.rounds);
    point.mean_reward /= rounds;
    point.mean_utilization /= rounds;
    point.mean_cs = cs_rounds > 0 ? point.mean_cs / cs_rounds : 0.0;
    point.avg_jct = report.summary.avg_jct;
    point.forced_placements = report.summary.forced_placements;
    result.curve.push_back(point);
  }

  if (!config.checkpoint_path.empty())
    save_checkpoint(config.checkpoint_path, net,
                    CheckpointMeta{config.seed, config.episode.weights, trace_id, config.episodes});
  return result;
}

}  // namespace csched
