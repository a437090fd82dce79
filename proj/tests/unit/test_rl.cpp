#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <csched/agent.hpp>
#include <csched/checkpoint.hpp>
#include <csched/error.hpp>
#include <csched/reward.hpp>
#include <csched/trainer.hpp>

#include "../support/fixtures.hpp"

using namespace csched;

namespace {

std::vector<double> flat_params(PolicyNetd::Params& p) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < p.count(); ++i) out.push_back(p.at(i));
  return out;
}

HeadMask random_mask(int size, std::mt19937_64& rng) {
  HeadMask m(size);
  for (int i = 0; i < size; ++i) m(i) = rng() % 2 == 0;
  m(size - 1) = true;
  return m;
}

int random_allowed(const HeadMask& m, std::mt19937_64& rng) {
  std::vector<int> ok;
  for (int i = 0; i < m.size(); ++i)
    if (m(i)) ok.push_back(i);
  return ok[rng() % ok.size()];
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Forces every head of a default-cluster policy towards one choice index.
PolicyNetd biased_policy(int favoured) {
  const ActionSpace space = ActionSpace::for_cluster({}, 3);
  PolicyNetd net(space.architecture(8), 1);
  for (int h = 0; h < 3; ++h) net.params().bp(h * space.head_size() + favoured) = 50.0;
  return net;
}

StateTensor observe(const ClusterState& c, const CandidateSet& cands) {
  return encode_state(c, cands, [](JobId) { return JobFeatures{ModelClass::IMG, 2.43, 211.25, 1.0, 0.0}; });
}

}  // namespace

TEST_CASE("reward arithmetic") {
  const RewardWeights w = RewardWeights::from_pair(0.4, 0.6);
  CHECK(reward_value(w, 1.5, 0.8) == doctest::Approx(-0.12).epsilon(1e-15));
  CHECK(compute_reward(ClusterState{}, {}, w) == 0.0);
  ClusterState full;
  full.allocate(0, {{0, 1, 2, 3}, 8});
  const std::vector<double> ones{1.0};
  CHECK(compute_reward(full, ones, w) == doctest::Approx(-0.4 + 0.6));
  const std::vector<double> big{10.0, 1.0};
  CHECK(mean_cs_term(big) == 2.5);
  CHECK(mean_cs_term({}) == 0.0);
}

TEST_CASE("reward weights") {
  CHECK(RewardWeights::branch('A')->w1 == 0.3);
  CHECK(RewardWeights::branch('E')->w1 == 0.7);
  CHECK(RewardWeights::branch('E')->w2() == doctest::Approx(0.3));
  CHECK_FALSE(RewardWeights::branch('F').has_value());
  CHECK(RewardWeights::from_pair(0.4, 0.6).w2() == 0.6);
  CHECK_THROWS_AS(RewardWeights::from_pair(0.4, 0.5), ConfigError);
  CHECK_THROWS_AS(RewardWeights::from_pair(1.5, -0.5), ConfigError);
  CHECK_THROWS_AS((RewardWeights{-0.1}.validate()), ConfigError);
}

TEST_CASE("reward stays within its documented bounds") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const RewardWeights w{u(rng)};
    ClusterState c;
    std::vector<double> cs;
    for (int k = 0; k < 5; ++k) {
      auto ps = enumerate_placements(c, 1 + static_cast<int>(rng() % 8));
      if (ps.empty()) continue;
      c.allocate(k, ps.front());
      cs.push_back(1.0 + 6.0 * u(rng));
    }
    const double r = compute_reward(c, cs, w);
    CHECK(r >= -w.w1 * kRewardCsCap - 1e-12);
    CHECK(r <= w.w2() + 1e-12);
  }
}

TEST_CASE("masked softmax") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd logits = Eigen::VectorXd::Random(12) * 20.0;
    const HeadMask mask = random_mask(12, rng);
    const Eigen::VectorXd p = masked_softmax(logits, mask);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < 12; ++i) {
      if (!mask(i)) CHECK(p(i) == 0.0);
      CHECK(p(i) >= 0.0);
    }
  }
}

TEST_CASE("action space shape") {
  const ActionSpace s = ActionSpace::for_cluster({}, 3);
  CHECK(s.placement_choices() == 11);
  CHECK(s.head_size() == 12);
  CHECK(s.input_dim() == 640);
  CHECK(choice_placement(s, 8, 0) == Placement{{0}, 8});
  CHECK(choice_placement(s, 8, 4) == Placement{{0, 1}, 4});
  CHECK_FALSE(choice_placement(s, 3, 4).has_value());
  CHECK_FALSE(choice_placement(s, 32, 0).has_value());
  CHECK(choice_placement(s, 32, 10) == Placement{{0, 1, 2, 3}, 8});
  CHECK_FALSE(choice_placement(s, 4, s.skip()).has_value());
}

TEST_CASE("full cluster forces the empty action") {
  ClusterState full;
  full.allocate(99, {{0, 1, 2, 3}, 8});
  const CandidateSet cands{{0, 1}, {4, 2}};
  PolicyNetd net = biased_policy(0);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const RlDecision d = decide_rl_base(net, observe(full, cands), full, cands, DecisionMode::Sample, &rng);
    CHECK(d.action.empty());
    for (int c : d.choices) CHECK(c == 11);
  }
}

TEST_CASE("greedy decisions are deterministic and sampled ones never conflict") {
  const ActionSpace space = ActionSpace::for_cluster({}, 3);
  PolicyNetd net(space.architecture(16), 9);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    ClusterState c;
    for (int k = 0; k < 3; ++k) {
      const int demands[] = {1, 2, 4, 8, 16};
      auto ps = enumerate_placements(c, demands[rng() % 5]);
      if (!ps.empty()) c.allocate(100 + k, ps[rng() % ps.size()]);
    }
    const CandidateSet cands{{0, 1, 2}, {8, 4, 2}};
    const StateTensor s = observe(c, cands);
    const auto a = decide_rl_base(net, s, c, cands, DecisionMode::Greedy);
    const auto b = decide_rl_base(net, s, c, cands, DecisionMode::Greedy);
    CHECK(a.choices == b.choices);
    const auto sampled = decide_rl_base(net, s, c, cands, DecisionMode::Sample, &rng);
    ClusterState scratch = c;
    for (const auto& [job, p] : sampled.action.placements) CHECK_NOTHROW(scratch.allocate(job, p));
  }
}

TEST_CASE("architecture mismatch is a load error") {
  const PolicyNetd net(NetArchitecture{10, 8, 3, 12, "tanh"}, 1);
  ClusterState c;
  const CandidateSet cands{{0}, {4}};
  CHECK_THROWS_AS(decide_rl_base(net, observe(c, cands), c, cands, DecisionMode::Greedy), LoadError);
}

TEST_CASE("hybrid falls back to greedy only on the empty action") {
  std::vector<JobSpec> specs{fixture::job(0, 4, 60), fixture::job(1, 2, 60)};
  std::vector<JobState> states{JobState::submitted(specs[0]), JobState::submitted(specs[1])};
  std::vector<JobId> queue{0, 1};
  const CandidateSet cands{{0, 1}, {4, 2}};

  SUBCASE("non-empty RL action is kept") {
    ClusterState c;
    PolicyNetd net = biased_policy(3);  // node 3 alone
    const SchedulingView view{c, queue, specs, states};
    const Action base = decide_rl_base(net, observe(c, cands), c, cands, DecisionMode::Greedy).action;
    const Action hybrid = decide_rl_hybrid(net, observe(c, cands), cands, view, DecisionMode::Greedy);
    REQUIRE_FALSE(base.empty());
    CHECK(hybrid.placements == base.placements);
  }
  SUBCASE("empty RL action on a full cluster stays empty") {
    ClusterState c;
    c.allocate(99, {{0, 1, 2, 3}, 8});
    PolicyNetd net = biased_policy(11);
    const SchedulingView view{c, queue, specs, states};
    CHECK(decide_rl_hybrid(net, observe(c, cands), cands, view, DecisionMode::Greedy).empty());
  }
  SUBCASE("empty RL action with room is replaced by greedy") {
    ClusterState c;
    c.allocate(99, {{0, 1, 2, 3}, 7});
    PolicyNetd net = biased_policy(11);
    const SchedulingView view{c, queue, specs, states};
    const Action a = decide_rl_hybrid(net, observe(c, cands), cands, view, DecisionMode::Greedy);
    CHECK(a.placements == decide_fifo_greedy(view).placements);
    CHECK(a.placements.size() == 1);
  }
}

TEST_CASE("discounted returns") {
  Trajectory t;
  for (double r : {1.0, 2.0, 3.0}) t.steps.push_back({Eigen::VectorXd::Zero(1), {}, {}, r, 0.5});
  t.bootstrap_value = 8.0;
  const auto g = discounted_returns(t);
  CHECK(g[2] == 3.0 + 0.5 * 8.0);
  CHECK(g[1] == 2.0 + 0.5 * g[2]);
  CHECK(g[0] == 1.0 + 0.5 * g[1]);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(123);
  const NetArchitecture arch{6, 4, 2, 4, "tanh"};
  for (int probe = 0; probe < 20; ++probe) {
    PolicyNetd net(arch, 1000 + probe);
    net.params().visit([&](const char*, auto& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::normal_distribution<double>(0.0, 0.7)(rng);
    });
    Trajectory traj;
    std::vector<double> adv, ret;
    for (int t = 0; t < 2; ++t) {
      TrajectoryStep s;
      s.state = Eigen::VectorXd::Random(arch.input_dim);
      for (int h = 0; h < arch.heads; ++h) {
        s.masks.push_back(random_mask(arch.head_size, rng));
        s.choices.push_back(random_allowed(s.masks.back(), rng));
      }
      traj.steps.push_back(s);
      adv.push_back(std::normal_distribution<double>()(rng));
      ret.push_back(std::normal_distribution<double>()(rng));
    }
    const ObjectiveWeights w{0.05, 0.5};
    auto grad = PolicyNetd::Params::zeros(arch);
    surrogate_objective(net, traj, adv, ret, w, &grad);

    const auto analytic = flat_params(grad);
    std::vector<double> numeric;
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < net.params().count(); ++i) {
      double& x = net.params().at(i);
      const double keep = x;
      x = keep + h;
      const double up = surrogate_objective(net, traj, adv, ret, w);
      x = keep - h;
      const double down = surrogate_objective(net, traj, adv, ret, w);
      x = keep;
      numeric.push_back((up - down) / (2 * h));
    }
    double diff = 0, na = 0, nn = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn += numeric[i] * numeric[i];
    }
    CHECK(std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12}) < 1e-4);
  }
}

TEST_CASE("zero advantage leaves the parameters unchanged") {
  const NetArchitecture arch{5, 4, 1, 3, "tanh"};
  PolicyNetd net(arch, 3);
  net.params().wv.setZero();
  net.params().bv(0) = 0.25;
  Trajectory traj;
  for (int t = 0; t < 4; ++t) {
    TrajectoryStep s{Eigen::VectorXd::Random(5), {1}, {HeadMask::Constant(3, true)}, 0.25, 0.0};
    traj.steps.push_back(s);
  }
  const auto before = net.params();
  AdamAscent<double> opt(arch, 1e-2);
  update(net, traj, {{0.0, 0.5}, true}, opt);
  CHECK(net.params() == before);
  CHECK_THROWS_AS(update(net, Trajectory{}, {}, opt), StateError);
}

TEST_CASE("positive advantage raises the taken action's log-probability") {
  const NetArchitecture arch{5, 4, 1, 3, "tanh"};
  PolicyNetd net(arch, 8);
  net.params().wv.setZero();
  net.params().bv(0) = 0.0;
  const Eigen::VectorXd x = Eigen::VectorXd::Random(5);
  const HeadMask mask = HeadMask::Constant(3, true);
  Trajectory traj;
  traj.steps.push_back({x, {2}, {mask}, 1.0, 1.0});
  const double before = masked_softmax(net.head_logits(net.forward(x), 0), mask)(2);
  AdamAscent<double> opt(arch, 1e-2);
  update(net, traj, {{0.0, 0.0}, true}, opt);
  const double after = masked_softmax(net.head_logits(net.forward(x), 0), mask)(2);
  CHECK(after > before);
}

TEST_CASE("masked policy-gradient estimator is unbiased") {
  // Two allowed actions and one masked; rewards 1 and 3.
  const NetArchitecture arch{1, 2, 1, 3, "tanh"};
  PolicyNetd net(arch, 5);
  net.params().bp << 0.3, -0.2, 4.0;
  HeadMask mask(3);
  mask << true, true, false;
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  const Eigen::VectorXd p = masked_softmax(net.head_logits(net.forward(x), 0), mask);
  const double reward[2] = {1.0, 3.0};

  auto score = [&](int a) {
    Trajectory t;
    t.steps.push_back({x, {a}, {mask}, 0.0, 1.0});
    const double adv = 1.0, ret = 0.0;
    auto g = PolicyNetd::Params::zeros(arch);
    surrogate_objective(net, t, std::span<const double>(&adv, 1), std::span<const double>(&ret, 1), {0.0, 0.0}, &g);
    return g.bp;
  };
  Eigen::VectorXd exact = p(0) * reward[0] * score(0) + p(1) * reward[1] * score(1);

  std::mt19937_64 rng(77);
  std::discrete_distribution<int> pick({p(0), p(1)});
  const int n = 10000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3), sq = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd s0 = score(0), s1 = score(1);
  for (int k = 0; k < n; ++k) {
    const int a = pick(rng);
    const Eigen::VectorXd g = reward[a] * (a == 0 ? s0 : s1);
    sum += g;
    sq += g.cwiseProduct(g);
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd var = sq / n - mean.cwiseProduct(mean);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(mean(i) - exact(i)) <= 3.0 * std::sqrt(var(i) / n));
  CHECK(s0(2) == 0.0);
  CHECK(s1(2) == 0.0);
  CHECK(exact(2) == 0.0);
}

TEST_CASE("checkpoint round trip and failure modes") {
  const auto dir = std::filesystem::temp_directory_path() / "csched_ckpt_test";
  std::filesystem::create_directories(dir);
  const ActionSpace space = ActionSpace::for_cluster({}, 3);
  const PolicyNetd net(space.architecture(8), 11);
  const CheckpointMeta meta{11, RewardWeights{0.7}, "normal-64-s0", 20};
  const std::string path = (dir / "p.ckpt").string();
  save_checkpoint(path, net, meta);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.policy == net);
  CHECK(back.meta == meta);
  CHECK(load_checkpoint(path, space.architecture(8)).policy == net);

  const std::string text = slurp(path);
  CHECK(text.rfind("csched-policy-checkpoint 1\n", 0) == 0);
  CHECK(text.find("w1=0.7") != std::string::npos);
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), ParseError);

  const ActionSpace k4 = ActionSpace::for_cluster({}, 4);
  try {
    load_checkpoint(path, k4.architecture(8));
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("heads=3") != std::string::npos);
    CHECK(msg.find("heads=4") != std::string::npos);
  }
  std::istringstream wrong_version("csched-policy-checkpoint 99\n");
  CHECK_THROWS_AS(read_checkpoint(wrong_version), LoadError);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string()), FileError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("training: liveness, curves and determinism") {
  const auto dir = std::filesystem::temp_directory_path() / "csched_train_test";
  std::filesystem::create_directories(dir);
  TrainConfig cfg;
  cfg.episodes = 1;
  cfg.hidden = 8;
  cfg.seed = 5;

  const TrainResult one = train({fixture::job(0, 4, 60)}, cfg);
  REQUIRE(one.curve.size() == 1);
  CHECK(one.curve[0].decisions >= 1);
  CHECK(one.curve[0].updates >= 1);
  CHECK(one.curve[0].avg_jct >= 60.0);

  TraceSpec ts;
  ts.num_jobs = 12;
  const auto jobs = generate_trace(ts);
  cfg.episodes = 2;
  cfg.update_every = 8;
  cfg.checkpoint_path = (dir / "a.ckpt").string();
  const TrainResult a = train(jobs, cfg, {}, "t");
  cfg.checkpoint_path = (dir / "b.ckpt").string();
  const TrainResult b = train(jobs, cfg, {}, "t");
  CHECK(slurp((dir / "a.ckpt").string()) == slurp((dir / "b.ckpt").string()));
  CHECK(a.curve.size() == 2);
  CHECK(a.policy == b.policy);

  cfg.episodes = 0;
  CHECK_THROWS_AS(train(jobs, cfg), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("training reward trends upward on a fixed 64-job trace") {
  double first = 0, last = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TraceSpec ts;
    ts.num_jobs = 64;
    ts.seed = seed;
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.episode.weights = *RewardWeights::branch('B');
    const TrainResult r = train(generate_trace(ts), cfg);
    REQUIRE(r.curve.size() == 20);
    for (int e = 0; e < 5; ++e) {
      first += r.curve[static_cast<std::size_t>(e)].mean_reward / 25.0;
      last += r.curve[static_cast<std::size_t>(15 + e)].mean_reward / 25.0;
    }
  }
  CHECK(last > first);
}
