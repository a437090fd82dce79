#include <doctest.h>

#include <random>

#include <csched/cluster.hpp>
#include <csched/error.hpp>

using namespace csched;

namespace {

bool has_shape(const std::vector<Placement>& ps, int nodes, int j) {
  for (const auto& p : ps)
    if (p.num_nodes() == nodes && p.gpus_per_node_used == j) return true;
  return false;
}

}  // namespace

TEST_CASE("enumerate_placements factorises the demand") {
  ClusterState c;
  auto four = enumerate_placements(c, 4);
  CHECK(has_shape(four, 1, 4));
  CHECK(has_shape(four, 2, 2));
  CHECK(has_shape(four, 4, 1));
  CHECK(four.size() == 4 + 6 + 1);

  auto eight = enumerate_placements(c, 8);
  CHECK_FALSE(has_shape(eight, 2, 2));
  CHECK(has_shape(eight, 2, 4));

  for (const auto& p : enumerate_placements(c, 3)) CHECK(p.num_nodes() == 1);
  CHECK(enumerate_placements(c, 3).size() == 4);
}

TEST_CASE("enumerate_placements ordering is ascending i then lexicographic nodes") {
  ClusterState c;
  auto ps = enumerate_placements(c, 4);
  for (std::size_t k = 1; k < ps.size(); ++k) {
    const auto& a = ps[k - 1];
    const auto& b = ps[k];
    CHECK((a.level() < b.level() || (a.level() == b.level() && a.nodes < b.nodes)));
  }
  CHECK(ps.front().nodes == std::vector<int>{0});
  CHECK(ps.back().nodes == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("enumerate_placements rejects impossible demands") {
  ClusterState c;
  CHECK_THROWS_AS(enumerate_placements(c, 0), InvalidDemandError);
  CHECK_THROWS_AS(enumerate_placements(c, -2), InvalidDemandError);
  CHECK_THROWS_AS(enumerate_placements(c, 33), InvalidDemandError);
}

TEST_CASE("enumerate_placements respects occupancy") {
  ClusterState c;
  c.allocate(1, {{0}, 7});
  for (const auto& p : enumerate_placements(c, 2))
    for (int n : p.nodes)
      if (p.gpus_per_node_used > 1) CHECK(n != 0);
  CHECK(enumerate_placements(c, 32).empty());
}

TEST_CASE("allocate and free") {
  ClusterState c;
  const ClusterState before = c;
  c.allocate(7, {{0}, 2});
  CHECK(c.used_gpus() == 2);
  CHECK(c.slot(0, 0) == 7);
  CHECK(c.slot(0, 1) == 7);
  CHECK(c.slot(0, 2) == kNoJob);

  SUBCASE("overlap conflicts and leaves state unchanged") {
    ClusterState full;
    full.allocate(1, {{0}, 8});
    const ClusterState snap = full;
    CHECK_THROWS_AS(full.allocate(2, {{0, 1}, 1}), AllocationConflictError);
    CHECK(full == snap);
    CHECK_THROWS_AS(full.allocate(1, {{2}, 1}), AllocationConflictError);
  }
  SUBCASE("unknown node or bad shape") {
    CHECK_THROWS_AS(c.allocate(2, {{4}, 1}), InvalidPlacementError);
    CHECK_THROWS_AS(c.allocate(2, {{0, 1, 2}, 1}), InvalidPlacementError);
    CHECK_THROWS_AS(c.allocate(2, {{1, 1}, 1}), InvalidPlacementError);
    CHECK_THROWS_AS(c.allocate(2, {{1}, 9}), InvalidPlacementError);
    CHECK_THROWS_AS(c.allocate(2, {{1}, 0}), InvalidPlacementError);
  }
  SUBCASE("free restores the prior occupancy") {
    c.release(7);
    CHECK(c == before);
  }
  SUBCASE("value-style wrappers") {
    ClusterState d = allocate(before, 3, {{1, 2}, 4});
    CHECK(d.used_gpus() == 8);
    CHECK(free(d, 3) == before);
  }
}

TEST_CASE("free errors and neighbour independence") {
  ClusterState c;
  CHECK_THROWS_AS(c.release(1), NotFoundError);
  CHECK_THROWS_AS(free(c, 1), NotFoundError);
  c.allocate(1, {{0}, 3});
  c.allocate(2, {{0}, 3});
  c.release(1);
  CHECK(c.slot(0, 3) == 2);
  CHECK(c.slot(0, 5) == 2);
  CHECK(c.slot(0, 0) == kNoJob);
  CHECK(c.audit());
}

TEST_CASE("colocated_jobs") {
  ClusterState c;
  c.allocate(1, {{0}, 2});
  c.allocate(2, {{1}, 2});
  CHECK(colocated_jobs(c, 1).empty());

  ClusterState d;
  d.allocate(1, {{0, 1}, 2});
  d.allocate(2, {{1, 2}, 2});
  CHECK(colocated_jobs(d, 1) == std::set<JobId>{2});

  ClusterState e;
  e.allocate(1, {{0}, 1});
  e.allocate(2, {{0}, 1});
  e.allocate(3, {{0}, 1});
  CHECK(colocated_jobs(e, 1) == std::set<JobId>{2, 3});
  CHECK(colocated_jobs(e, 2) == std::set<JobId>{1, 3});
  CHECK_THROWS_AS(colocated_jobs(e, 9), NotFoundError);
}

TEST_CASE("utilization") {
  ClusterState c;
  CHECK(utilization(c) == 0.0);
  c.allocate(1, {{0}, 8});
  CHECK(utilization(c) == 0.25);
}

TEST_CASE("utilization of a full cluster") {
  ClusterState c;
  c.allocate(1, {{0, 1, 2, 3}, 8});
  CHECK(utilization(c) == 1.0);
}

TEST_CASE("random allocate/free sequences stay consistent") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    ClusterState c;
    std::vector<JobId> live;
    JobId next = 0;
    for (int step = 0; step < 60; ++step) {
      const double u0 = utilization(c);
      if (!live.empty() && rng() % 3 == 0) {
        std::size_t k = rng() % live.size();
        const int d = c.placement_of(live[k]).total_gpus();
        c.release(live[k]);
        live.erase(live.begin() + static_cast<long>(k));
        CHECK(utilization(c) == doctest::Approx(u0 - d / 32.0).epsilon(1e-15));
      } else {
        const int d = 1 + static_cast<int>(rng() % 32);
        auto ps = enumerate_placements(c, d);
        for (const auto& p : ps) CHECK(c.can_allocate(p));
        if (ps.empty()) continue;
        const auto& p = ps[rng() % ps.size()];
        c.allocate(next, p);
        live.push_back(next++);
        CHECK(utilization(c) == doctest::Approx(u0 + d / 32.0).epsilon(1e-15));
      }
      REQUIRE(c.audit());
      int used = 0;
      for (int n = 0; n < 4; ++n) used += 8 - c.free_gpus(n);
      CHECK(used == c.used_gpus());
    }
  }
}

TEST_CASE("shapes and node subsets") {
  ClusterConfig cfg;
  CHECK(max_level(cfg) == 2);
  CHECK(is_schedulable_demand(cfg, 24));
  CHECK_FALSE(is_schedulable_demand(cfg, 9));
  CHECK_FALSE(is_schedulable_demand(cfg, 33));
  CHECK(node_subsets(4).size() == 11);
  CHECK(node_subsets(3).size() == 3 + 3);
  CHECK_THROWS_AS((ClusterConfig{0, 8, 1, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((ClusterConfig{4, 8, 0, 1}.validate()), ConfigError);
}
