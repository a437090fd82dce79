#include "csched/agent.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "csched/error.hpp"

namespace csched {

std::optional<Placement> choice_placement(const ActionSpace& space, int demand, int choice) {
  if (choice < 0 || choice >= space.placement_choices()) return std::nullopt;
  const auto& nodes = node_subsets(space.num_nodes)[static_cast<std::size_t>(choice)];
  const int count = static_cast<int>(nodes.size());
  if (demand % count != 0) return std::nullopt;
  const int per_node = demand / count;
  if (per_node < 1 || per_node > space.gpus_per_node) return std::nullopt;
  return Placement{nodes, per_node};
}

HeadMask candidate_mask(const ActionSpace& space, const ClusterState& cluster, int demand) {
  HeadMask mask = HeadMask::Constant(space.head_size(), false);
  mask(space.skip()) = true;
  for (int c = 0; c < space.placement_choices(); ++c) {
    auto p = choice_placement(space, demand, c);
    if (!p) continue;
    bool fits = true;
    for (int n : p->nodes) fits = fits && cluster.free_gpus(n) >= p->gpus_per_node_used;
    mask(c) = fits;
  }
  return mask;
}

HeadMask skip_only_mask(const ActionSpace& space) {
  HeadMask mask = HeadMask::Constant(space.head_size(), false);
  mask(space.skip()) = true;
  return mask;
}

bool has_placement_choice(const ActionSpace& space, const ClusterState& cluster, const CandidateSet& candidates) {
  for (std::size_t c = 0; c < candidates.size() && static_cast<int>(c) < space.k; ++c)
    if (candidate_mask(space, cluster, candidates.demands[c]).count() > 1) return true;
  return false;
}

namespace {

int draw(const Eigen::VectorXd& probs, const HeadMask& mask, DecisionMode mode, std::mt19937_64* rng) {
  if (mask.count() == 1) {
    for (Eigen::Index i = 0; i < mask.size(); ++i)
      if (mask(i)) return static_cast<int>(i);
  }
  if (mode == DecisionMode::Greedy || rng == nullptr) {
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < probs.size(); ++i)
      if (mask(i) && (best < 0 || probs(i) > probs(best))) best = i;
    return static_cast<int>(best);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(*rng);
  Eigen::Index last = -1;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (!mask(i)) continue;
    last = i;
    x -= probs(i);
    if (x < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(last);
}

}  // namespace

RlDecision decide_rl_base(const PolicyNetd& policy, const StateTensor& state, const ClusterState& cluster,
                          const CandidateSet& candidates, DecisionMode mode, std::mt19937_64* rng) {
  const NetArchitecture& arch = policy.architecture();
  const ActionSpace space{cluster.config().num_nodes, cluster.config().gpus_per_node, arch.heads};
  if (arch.head_size != space.head_size() || arch.input_dim != state.size())
    throw LoadError("policy architecture (" + arch.describe() + ") does not match the cluster/state shape");

  const auto cache = policy.forward(state.flat());
  ClusterState scratch = cluster;
  RlDecision out;
  for (int h = 0; h < arch.heads; ++h) {
    const bool has_candidate = h < static_cast<int>(candidates.size());
    HeadMask mask = has_candidate ? candidate_mask(space, scratch, candidates.demands[static_cast<std::size_t>(h)])
                                  : skip_only_mask(space);
    const Eigen::VectorXd probs = masked_softmax(policy.head_logits(cache, h), mask);
    const int choice = draw(probs, mask, mode, rng);
    if (choice != space.skip()) {
      const JobId job = candidates.jobs[static_cast<std::size_t>(h)];
      Placement p = *choice_placement(space, candidates.demands[static_cast<std::size_t>(h)], choice);
      scratch.allocate(job, p);
      out.action.placements.emplace_back(job, std::move(p));
    }
    out.choices.push_back(choice);
    out.masks.push_back(std::move(mask));
  }
  return out;
}

Action decide_rl_hybrid(const PolicyNetd& policy, const StateTensor& state, const CandidateSet& candidates,
                        const SchedulingView& view, DecisionMode mode, std::mt19937_64* rng) {
  RlDecision rl = decide_rl_base(policy, state, view.cluster, candidates, mode, rng);
  if (!rl.action.placements.empty()) return std::move(rl.action);
  Action greedy = decide_fifo_greedy(view);
  return greedy.placements.empty() ? std::move(rl.action) : greedy;
}

std::vector<double> discounted_returns(const Trajectory& trajectory) {
  std::vector<double> out(trajectory.size());
  long double g = trajectory.bootstrap_value;
  for (std::size_t t = trajectory.size(); t-- > 0;) {
    g = trajectory.steps[t].reward + static_cast<long double>(trajectory.steps[t].discount) * g;
    out[t] = static_cast<double>(g);
  }
  return out;
}

double surrogate_objective(const PolicyNetd& policy, const Trajectory& trajectory, std::span<const double> advantages,
                           std::span<const double> returns, const ObjectiveWeights& weights,
                           PolicyNetd::Params* grad) {
  const NetArchitecture& arch = policy.architecture();
  const double inv_n = 1.0 / static_cast<double>(trajectory.size());
  long double total = 0.0;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const TrajectoryStep& step = trajectory.steps[t];
    const auto cache = policy.forward(step.state);
    Eigen::VectorXd d_logits = Eigen::VectorXd::Zero(arch.num_logits());
    double step_obj = 0.0;
    for (int h = 0; h < arch.heads; ++h) {
      const HeadMask& mask = step.masks[static_cast<std::size_t>(h)];
      const Eigen::VectorXd p = masked_softmax(policy.head_logits(cache, h), mask);
      const int a = step.choices[static_cast<std::size_t>(h)];
      const double entropy = categorical_entropy(p);
      step_obj += advantages[t] * std::log(p(a)) + weights.entropy_coef * entropy;
      if (grad == nullptr) continue;
      auto d = d_logits.segment(h * arch.head_size, arch.head_size);
      for (int i = 0; i < arch.head_size; ++i) {
        if (!mask(i)) continue;
        const double indicator = i == a ? 1.0 : 0.0;
        const double d_entropy = p(i) > 0.0 ? -p(i) * (std::log(p(i)) + entropy) : 0.0;
        d(i) = inv_n * (advantages[t] * (indicator - p(i)) + weights.entropy_coef * d_entropy);
      }
    }
    const double err = cache.value - returns[t];
    step_obj -= 0.5 * weights.value_coef * err * err;
    total += step_obj;
    if (grad != nullptr) policy.backward(cache, d_logits, -inv_n * weights.value_coef * err, *grad);
  }
  return static_cast<double>(total * inv_n);
}

UpdateStats update(PolicyNetd& policy, const Trajectory& trajectory, const UpdateConfig& config,
                   AdamAscent<double>& optimiser) {
  if (trajectory.empty()) throw StateError("cannot update from an empty trajectory");
  const std::vector<double> returns = discounted_returns(trajectory);
  std::vector<double> advantages(trajectory.size());
  for (std::size_t t = 0; t < trajectory.size(); ++t)
    advantages[t] = returns[t] - policy.forward(trajectory.steps[t].state).value;

  if (config.normalize_advantages && advantages.size() >= 2) {
    const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / advantages.size();
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / advantages.size());
    for (double& a : advantages) a = sd > 1e-12 ? (a - mean) / sd : a - mean;
  }

  PolicyNetd::Params grad = PolicyNetd::Params::zeros(policy.architecture());
  UpdateStats stats;
  stats.objective = surrogate_objective(policy, trajectory, advantages, returns, config.objective, &grad);
  stats.grad_norm = std::sqrt(grad.squared_norm());
  stats.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / returns.size();
  if (!std::isfinite(stats.objective) || !std::isfinite(stats.grad_norm)) {
    std::size_t bad = 0;
    for (; bad < trajectory.size(); ++bad)
      if (!std::isfinite(returns[bad]) || !std::isfinite(advantages[bad]) ||
          !trajectory.steps[bad].state.allFinite())
        break;
    throw NumericError("non-finite policy objective (objective=" + std::to_string(stats.objective) +
                       ", grad_norm=" + std::to_string(stats.grad_norm) + ", first suspicious step=" +
                       std::to_string(bad) + " of " + std::to_string(trajectory.size()) + ")");
  }
  optimiser.step(policy.params(), std::move(grad));
  return stats;
}

}  // namespace csched
