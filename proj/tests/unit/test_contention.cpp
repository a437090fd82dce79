#include <doctest.h>

#include <random>
#include <sstream>

#include <csched/contention.hpp>
#include <csched/error.hpp>

#include "../support/oracles.hpp"

using namespace csched;

namespace {

ModelProfile profile(double bw, double r) { return {ModelClass::LM, bw, r, CommPattern::AllReduce}; }

double cs_of(std::size_t t, const std::vector<ModelProfile>& prof, const std::vector<Placement>& pl,
             const ContentionParams& params = ContentionParams::synthetic(), const ClusterConfig& cfg = {}) {
  std::vector<PlacedJob> all;
  for (std::size_t i = 0; i < prof.size(); ++i) all.push_back({&prof[i], &pl[i]});
  return contention_sensitivity(all[t], all, params, cfg);
}

}  // namespace

TEST_CASE("default profiles carry the published workload table") {
  struct Row {
    ModelClass m;
    double bw, r;
  };
  const Row rows[] = {{ModelClass::GNN, 24.63, 0.57},   {ModelClass::IMG, 211.25, 2.43},
                      {ModelClass::DLRM, 170.28, 13.36}, {ModelClass::LM, 854.82, 1.87},
                      {ModelClass::FSDP, 2672.40, 7.32}, {ModelClass::MoE, 929.48, 13.79}};
  for (const Row& row : rows) {
    CHECK(default_profile(row.m).avg_bandwidth == row.bw);
    CHECK(default_profile(row.m).comm_comp_ratio == row.r);
  }
  CHECK(default_profile(ModelClass::MoE).comm_pattern == CommPattern::AllToAll);
}

TEST_CASE("model names round-trip case-insensitively") {
  for (ModelClass m : kAllModelClasses) CHECK(parse_model_class(to_string(m)) == m);
  CHECK(parse_model_class("fsdp") == ModelClass::FSDP);
  CHECK(parse_model_class("moe") == ModelClass::MoE);
  CHECK_FALSE(parse_model_class("bert").has_value());
}

TEST_CASE("isolated job has CS exactly 1") {
  for (ModelClass m : kAllModelClasses) {
    const ModelProfile p = default_profile(m);
    for (const Placement& pl : {Placement{{0}, 8}, Placement{{0, 1}, 4}, Placement{{0, 1, 2, 3}, 8}}) {
      CHECK(cs_of(0, {p}, {pl}) == 1.0);
      CHECK(cs_of(0, {p}, {pl}, ContentionParams::with_table(default_cs_table())) == 1.0);
    }
  }
}

TEST_CASE("synthetic CS 1.5 worked example") {
  // r = 1 gives f = 0.5; two jobs each loading both links with 900 MB/s against
  // B = 900 gives D/B = 2.
  const std::vector<ModelProfile> prof{profile(1800, 1.0), profile(1800, 1.0)};
  const std::vector<Placement> pl{{{0, 1}, 4}, {{0, 1}, 4}};
  const double got = cs_of(0, prof, pl);
  const double expected = oracle::synthetic_cs({{1800, 1.0, {0, 1}}, {1800, 1.0, {0, 1}}}, 0, 900, 16000);
  CHECK(expected == 1.5);
  CHECK(got == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("no penalty without oversubscription") {
  const std::vector<ModelProfile> prof{profile(400, 3.0), profile(400, 3.0)};
  const std::vector<Placement> pl{{{0, 1}, 2}, {{1, 2}, 2}};
  CHECK(cs_of(0, prof, pl) == 1.0);
}

TEST_CASE("single-node jobs contend on the internal bus only") {
  ClusterConfig cfg;
  cfg.intra_node_bandwidth = 1000;
  const std::vector<ModelProfile> prof{profile(800, 1.0), profile(800, 1.0), profile(5000, 1.0)};
  const std::vector<Placement> pl{{{0}, 2}, {{0}, 2}, {{0, 1}, 2}};
  // bus load 1600 / 1000; the spanning job only loads the network link
  CHECK(cs_of(0, prof, pl, ContentionParams::synthetic(), cfg) == doctest::Approx(1.3));
  CHECK(cs_of(2, prof, pl, ContentionParams::synthetic(), cfg) == 1.0);
}

TEST_CASE("contention disabled forces CS = 1") {
  const std::vector<ModelProfile> prof{default_profile(ModelClass::FSDP), default_profile(ModelClass::MoE)};
  const std::vector<Placement> pl{{{0, 1}, 4}, {{0, 1}, 4}};
  CHECK(cs_of(0, prof, pl) > 1.0);
  CHECK(cs_of(0, prof, pl, ContentionParams::disabled()) == 1.0);
}

TEST_CASE("shipped table reproduces the quoted extremes") {
  const auto table = ContentionParams::with_table(default_cs_table());
  const std::vector<ModelProfile> prof{default_profile(ModelClass::FSDP), default_profile(ModelClass::MoE)};
  const std::vector<Placement> pl{{{0, 1}, 4}, {{0, 1}, 4}};
  CHECK(cs_of(0, prof, pl, table) == 1.96);
  CHECK(cs_of(1, prof, pl, table) == 3.00);

  double fsdp_moe = 1.0, moe_fsdp = 1.0, fsdp_img = 1.0, img_fsdp = 1.0;
  for (const auto& [k, v] : default_cs_table()->entries()) {
    if (k.target == ModelClass::FSDP && k.colocated == ModelClass::MoE) fsdp_moe = std::max(fsdp_moe, v);
    if (k.target == ModelClass::MoE && k.colocated == ModelClass::FSDP) moe_fsdp = std::max(moe_fsdp, v);
    if (k.target == ModelClass::FSDP && k.colocated == ModelClass::IMG) fsdp_img = std::max(fsdp_img, v);
    if (k.target == ModelClass::IMG && k.colocated == ModelClass::FSDP) img_fsdp = std::max(img_fsdp, v);
    CHECK(v >= 1.0);
  }
  CHECK(fsdp_moe == 1.96);
  CHECK(moe_fsdp == 3.00);
  CHECK(fsdp_img <= 1.35);
  CHECK(img_fsdp <= 1.43);
  // 1 - 1/CS against the quoted 49.1% and 66.7% degradations
  CHECK(std::abs(100.0 * (1.0 - 1.0 / fsdp_moe) - 49.1) <= 0.5);
  CHECK(std::abs(100.0 * (1.0 - 1.0 / moe_fsdp) - 66.7) <= 0.5);
}

TEST_CASE("table mode takes the pairwise max and falls back to synthetic") {
  auto t = std::make_shared<CSTable>();
  t->set({ModelClass::LM, {1, 4}, ModelClass::IMG, {1, 4}}, 1.2);
  t->set({ModelClass::LM, {1, 4}, ModelClass::GNN, {1, 4}}, 1.7);
  const auto params = ContentionParams::with_table(t);
  std::vector<ModelProfile> prof{default_profile(ModelClass::LM), default_profile(ModelClass::IMG),
                                 default_profile(ModelClass::GNN)};
  const std::vector<Placement> pl{{{0, 1}, 4}, {{0, 1}, 4}, {{1, 2}, 4}};
  CHECK(cs_of(0, prof, pl, params) == 1.7);
  // IMG | LM is missing, so the synthetic pairwise value is used
  const double synth =
      cs_of(0, {prof[1], prof[0]}, {pl[1], pl[0]}, ContentionParams::synthetic());
  CHECK(cs_of(1, prof, pl, params) == doctest::Approx(synth));
}

TEST_CASE("contended throughput") {
  auto t = std::make_shared<CSTable>();
  t->set({ModelClass::IMG, {1, 4}, ModelClass::IMG, {1, 4}}, 2.0);
  const std::vector<ModelProfile> prof{default_profile(ModelClass::IMG), default_profile(ModelClass::IMG)};
  const std::vector<Placement> pl{{{0, 1}, 4}, {{0, 1}, 4}};
  std::vector<PlacedJob> all{{&prof[0], &pl[0]}, {&prof[1], &pl[1]}};
  CHECK(contended_throughput(100.0, all[0], all, ContentionParams::with_table(t), {}) == 50.0);
  CHECK(contended_throughput(100.0, all[0], std::span<const PlacedJob>(all.data(), 1),
                             ContentionParams::with_table(t), {}) == 100.0);
}

TEST_CASE("unplaced job is a precondition error") {
  const ModelProfile p = default_profile(ModelClass::IMG);
  const Placement empty;
  PlacedJob j{&p, &empty};
  CHECK_THROWS_AS(contention_sensitivity(j, {}, ContentionParams::synthetic(), {}), PreconditionError);
  CHECK_THROWS_AS(ContentionParams::with_table(nullptr).validate(), ConfigError);
}

TEST_CASE("CS table parsing") {
  SUBCASE("documented row") {
    std::istringstream in("# comment\nFSDP,2,4,MoE,2,4,1.96\n\n");
    const CSTable t = parse_cs_table(in);
    CHECK(t.size() == 1);
    CHECK(t.find({ModelClass::FSDP, {1, 4}, ModelClass::MoE, {1, 4}}) == 1.96);
    CHECK_FALSE(t.find({ModelClass::MoE, {1, 4}, ModelClass::FSDP, {1, 4}}).has_value());
  }
  SUBCASE("empty file") {
    std::istringstream in("");
    CHECK(parse_cs_table(in).empty());
  }
  SUBCASE("value below 1") {
    std::istringstream in("FSDP,2,4,MoE,2,4,0.9\n");
    CHECK_THROWS_AS(parse_cs_table(in), ValidationError);
  }
  SUBCASE("malformed rows carry the line number") {
    for (const char* bad : {"FSDP,2,4,MoE,2,4\n", "FSDP,3,4,MoE,2,4,1.5\n", "BERT,2,4,MoE,2,4,1.5\n",
                            "FSDP,2,4,MoE,2,4,abc\n", "FSDP,2,x,MoE,2,4,1.5\n"}) {
      std::istringstream in(std::string("# header\n") + bad);
      try {
        parse_cs_table(in);
        FAIL("expected a parse error for " << bad);
      } catch (const ParseError& e) {
        CHECK(e.line() == 2);
      }
    }
  }
  SUBCASE("write/parse round trip") {
    std::ostringstream out;
    write_cs_table(out, *default_cs_table());
    std::istringstream in(out.str());
    CHECK(parse_cs_table(in).entries() == default_cs_table()->entries());
  }
  CHECK_THROWS_AS(load_cs_table("/nonexistent/table.csv"), FileError);
}

TEST_CASE("synthetic model agrees with the per-link oracle on random states") {
  std::mt19937_64 rng(5);
  ClusterConfig cfg;
  for (int trial = 0; trial < 2000; ++trial) {
    ClusterState c(cfg);
    std::vector<ModelProfile> prof;
    std::vector<Placement> pl;
    for (int k = 0; k < 6; ++k) {
      auto ps = enumerate_placements(c, 1 + static_cast<int>(rng() % 16));
      if (ps.empty()) continue;
      Placement p = ps[rng() % ps.size()];
      c.allocate(static_cast<JobId>(pl.size()), p);
      ModelProfile m = default_profile(kAllModelClasses[rng() % 6]);
      m.avg_bandwidth *= 0.8 + 0.4 * std::uniform_real_distribution<double>()(rng);
      prof.push_back(m);
      pl.push_back(p);
    }
    std::vector<oracle::Resident> res;
    for (std::size_t i = 0; i < pl.size(); ++i) res.push_back({prof[i].avg_bandwidth, prof[i].comm_comp_ratio, pl[i].nodes});
    for (std::size_t i = 0; i < pl.size(); ++i)
      CHECK(cs_of(i, prof, pl) ==
            doctest::Approx(oracle::synthetic_cs(res, i, cfg.inter_node_bandwidth, cfg.intra_node_bandwidth))
                .epsilon(1e-12));
  }
}
