#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "csched/cluster.hpp"
#include "csched/encoding.hpp"
#include "csched/policies.hpp"
#include "csched/policy_net.hpp"

namespace csched {

// Per candidate, one choice per power-of-two node subset (which fixes j as
// demand / |subset|) plus a trailing skip. The size depends only on the
// cluster shape and K.
struct ActionSpace {
  int num_nodes = 4;
  int gpus_per_node = 8;
  int k = 3;

  static ActionSpace for_cluster(const ClusterConfig& config, int k) {
    return {config.num_nodes, config.gpus_per_node, k};
  }
  int placement_choices() const { return static_cast<int>(node_subsets(num_nodes).size()); }
  int head_size() const { return placement_choices() + 1; }
  int skip() const { return placement_choices(); }
  int input_dim() const { return num_nodes * 2 * gpus_per_node * kFeatureDim; }
  NetArchitecture architecture(int hidden) const { return {input_dim(), hidden, k, head_size(), "tanh"}; }
};

using HeadMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Placement implied by a choice index, or nullopt for skip / shape mismatch.
std::optional<Placement> choice_placement(const ActionSpace& space, int demand, int choice);
// Feasible choices for one candidate against `cluster`; skip is always set.
HeadMask candidate_mask(const ActionSpace& space, const ClusterState& cluster, int demand);
HeadMask skip_only_mask(const ActionSpace& space);
// True when some candidate has at least one feasible placement.
bool has_placement_choice(const ActionSpace& space, const ClusterState& cluster, const CandidateSet& candidates);

enum class DecisionMode { Sample, Greedy };

struct RlDecision {
  Action action;
  std::vector<int> choices;     // one per head
  std::vector<HeadMask> masks;  // mask each head was drawn under
};

// Heads are resolved in candidate order; the mask of head k accounts for the
// placements already chosen by heads 0..k-1. Heads without a candidate skip.
// Greedy mode takes the arg-max (lowest index on ties) and ignores `rng`.
RlDecision decide_rl_base(const PolicyNetd& policy, const StateTensor& state, const ClusterState& cluster,
                          const CandidateSet& candidates, DecisionMode mode, std::mt19937_64* rng = nullptr);

// The RL decision, unless it schedules nothing while FIFO-greedy would place a
// job, in which case the greedy action.
Action decide_rl_hybrid(const PolicyNetd& policy, const StateTensor& state, const CandidateSet& candidates,
                        const SchedulingView& view, DecisionMode mode, std::mt19937_64* rng = nullptr);

// One decision point. Rounds in which no candidate could be placed are folded
// into the reward and discount of the preceding step.
struct TrajectoryStep {
  Eigen::VectorXd state;
  std::vector<int> choices;
  std::vector<HeadMask> masks;
  double reward = 0.0;    // discounted reward collected until the next step
  double discount = 1.0;  // gamma^(rounds until the next step)
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double bootstrap_value = 0.0;  // value estimate after the last step; 0 at episode end

  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
};

// G_t = r_t + discount_t * G_{t+1}, seeded with the bootstrap value.
std::vector<double> discounted_returns(const Trajectory& trajectory);

struct ObjectiveWeights {
  double entropy_coef = 0.01;
  double value_coef = 0.5;
};

// Surrogate objective to ascend:
//   mean_t [ A_t * sum_k log pi_k(a_tk) + beta * sum_k H_k(s_t) ] - c_v * mean_t (V(s_t) - G_t)^2 / 2
// with advantages and returns held fixed. Adds its gradient to `grad` if given.
double surrogate_objective(const PolicyNetd& policy, const Trajectory& trajectory, std::span<const double> advantages,
                           std::span<const double> returns, const ObjectiveWeights& weights,
                           PolicyNetd::Params* grad = nullptr);

struct UpdateConfig {
  ObjectiveWeights objective;
  bool normalize_advantages = true;  // applied when the trajectory has >= 2 steps
};

struct UpdateStats {
  double objective = 0.0;
  double mean_return = 0.0;
  double grad_norm = 0.0;
};

// One optimiser step on the baseline-subtracted policy-gradient objective.
// Throws NumericError on a non-finite objective or gradient.
UpdateStats update(PolicyNetd& policy, const Trajectory& trajectory, const UpdateConfig& config,
                   AdamAscent<double>& optimiser);

}  // namespace csched
