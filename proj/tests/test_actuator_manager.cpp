#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "pcs/actuator_manager.hpp"

namespace {

using namespace pcs;

ActuatorGroup additive(std::string id, double availability, double capacity = 10.0) {
  return {std::move(id), "MW", GroupSemantics::Additive, capacity, availability, 0.0, capacity, 0.0};
}

ActuatorGroup exclusive(std::string id, double idle = 0.0) {
  const double inf = std::numeric_limits<double>::infinity();
  return {std::move(id), "", GroupSemantics::Exclusive, 1.0, 1.0, -inf, inf, idle};
}

TEST(Allocate, ServesPrioritiesInOrder) {
  std::vector<ActuatorGroup> g{additive("nbi", 1.3)};
  std::vector<ResourceRequest> r{{"da", "nbi", 1.3, 0.0}, {"ff", "nbi", 0.65, 0.0}};
  TaskPriorities p{{"ff", 1}, {"da", 2}};
  auto a = allocate(r, g, p);
  EXPECT_DOUBLE_EQ(a.granted("ff", "nbi"), 0.65);
  EXPECT_DOUBLE_EQ(a.granted("da", "nbi"), 0.65);
  EXPECT_TRUE(a.starved.empty());
  // Grants come back in request order.
  EXPECT_EQ(a.grants[0].task, "da");
}

TEST(Allocate, MinimumAcceptableOrNothing) {
  std::vector<ActuatorGroup> g{additive("ec", 1.0)};
  std::vector<ResourceRequest> r{{"a", "ec", 0.7, 0.0}, {"b", "ec", 0.5, 0.4}, {"c", "ec", 0.5, 0.0}};
  TaskPriorities p{{"a", 1}, {"b", 2}, {"c", 3}};
  auto a = allocate(r, g, p);
  EXPECT_DOUBLE_EQ(a.granted("a", "ec"), 0.7);
  EXPECT_DOUBLE_EQ(a.granted("b", "ec"), 0.0);
  EXPECT_NEAR(a.granted("c", "ec"), 0.3, 1e-15);
  EXPECT_EQ(a.starved, std::vector<std::string>{"b"});
}

TEST(Allocate, ZeroRequestIsNotStarved) {
  std::vector<ActuatorGroup> g{additive("nbi", 0.0)};
  std::vector<ResourceRequest> r{{"idle", "nbi", 0.0, 0.0}, {"hungry", "nbi", 0.2, 0.0}};
  auto a = allocate(r, g, {{"idle", 1}, {"hungry", 2}});
  EXPECT_EQ(a.starved, std::vector<std::string>{"hungry"});
}

TEST(Allocate, RejectsMalformedRequests) {
  std::vector<ActuatorGroup> g{additive("nbi", 1.0)};
  std::vector<ResourceRequest> dup{{"a", "nbi", 0.1, 0.0}, {"a", "nbi", 0.1, 0.0}};
  EXPECT_THROW(allocate(dup, g, {{"a", 1}}), ConfigError);
  std::vector<ResourceRequest> unknown{{"a", "gas", 0.1, 0.0}};
  EXPECT_THROW(allocate(unknown, g, {{"a", 1}}), ConfigError);
  std::vector<ResourceRequest> ok{{"a", "nbi", 0.1, 0.0}};
  EXPECT_THROW(allocate(ok, g, {}), ConfigError);
}

TEST(Merge, AdditiveSumsAndClamps) {
  std::vector<ActuatorGroup> g{additive("nbi", 1.3, 1.3)};
  Allocation a{{{"ff", "nbi", 0.65}, {"da", "nbi", 0.65}}, {}};
  std::vector<TaskCommand> out{{"ff", {"nbi", 0.65, 0.0}}, {"da", {"nbi", 0.9, 0.0}}};
  auto m = merge_commands(out, a, g, {{"ff", 1}, {"da", 2}}, 0.5);
  ASSERT_EQ(m.commands.size(), 1u);
  EXPECT_DOUBLE_EQ(m.commands[0].value, 1.3);
  EXPECT_DOUBLE_EQ(m.commands[0].time, 0.5);
}

TEST(Merge, ExclusiveTakesHighestPriorityOwner) {
  std::vector<ActuatorGroup> g{exclusive("gas")};
  Allocation a{{{"ff", "gas", 1.0}, {"da", "gas", 1.0}}, {}};
  std::vector<TaskCommand> out{{"ff", {"gas", 2.0, 0.0}}, {"da", {"gas", 1.5, 0.0}}};
  auto m = merge_commands(out, a, g, {{"da", 3}, {"ff", 4}}, 0.0);
  EXPECT_DOUBLE_EQ(m.commands[0].value, 1.5);
}

TEST(Merge, UngrantedContributionIsDroppedAndReported) {
  std::vector<ActuatorGroup> g{additive("nbi", 1.0), exclusive("gas", 0.25)};
  Allocation a{{{"ff", "nbi", 0.5}, {"x", "nbi", 0.0}}, {"x"}};
  std::vector<TaskCommand> out{{"ff", {"nbi", 0.5, 0.0}}, {"x", {"nbi", 0.4, 0.0}}};
  auto m = merge_commands(out, a, g, {{"ff", 1}, {"x", 2}}, 0.0);
  EXPECT_DOUBLE_EQ(m.commands[0].value, 0.5);
  EXPECT_DOUBLE_EQ(m.commands[1].value, 0.25);  // idle
  ASSERT_EQ(m.violations.size(), 1u);
}

// Greedy equals the exhaustive priority-lexicographic optimum on a 0.05 grid.
TEST(Allocate, MatchesGridOracle) {
  std::mt19937_64 rng(1);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 3000; ++trial) {
    const int n_groups = pick(1, 2);
    const int n_tasks = pick(1, 3);
    std::vector<int> avail;
    std::vector<ActuatorGroup> groups;
    for (int gi = 0; gi < n_groups; ++gi) {
      avail.push_back(pick(0, 12));
      groups.push_back(additive("g" + std::to_string(gi), avail.back() * 0.05));
    }
    std::vector<oracle::GridRequest> grid;
    std::vector<ResourceRequest> requests;
    TaskPriorities prio;
    std::vector<int> perm{1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int t = 0; t < n_tasks; ++t) {
      const std::string id = "t" + std::to_string(t);
      prio[id] = perm[static_cast<std::size_t>(t)];
      for (int gi = 0; gi < n_groups; ++gi) {
        if (pick(0, 3) == 0) continue;
        const int req = pick(0, 10);
        const int mn = pick(0, 1) ? 0 : pick(0, req);
        grid.push_back({prio[id], gi, req, mn});
        requests.push_back({id, "g" + std::to_string(gi), req * 0.05, mn * 0.05});
      }
    }
    const auto best = oracle::best_grid_allocation(grid, avail);
    const auto got = allocate(requests, groups, prio);
    for (std::size_t i = 0; i < requests.size(); ++i) {
      ASSERT_NEAR(got.grants[i].granted, best[i] * 0.05, 1e-9) << "trial " << trial << " request " << i;
    }
  }
}

TEST(Allocate, NeverExceedsAvailability) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<ActuatorGroup> groups{additive("a", u(rng) * 2), additive("b", u(rng))};
    std::vector<ResourceRequest> requests;
    TaskPriorities prio;
    const int n = 1 + static_cast<int>(u(rng) * 6);
    for (int t = 0; t < n; ++t) {
      const std::string id = "t" + std::to_string(t);
      prio[id] = static_cast<int>(u(rng) * 10);
      requests.push_back({id, "a", u(rng) * 1.5 - 0.2, u(rng) * 0.3});
      if (u(rng) < 0.5) requests.push_back({id, "b", u(rng), 0.0});
    }
    const auto a = allocate(requests, groups, prio);
    for (const auto& g : groups) ASSERT_LE(a.total(g.id), g.availability);
    for (std::size_t i = 0; i < requests.size(); ++i) {
      ASSERT_GE(a.grants[i].granted, 0.0);
      ASSERT_LE(a.grants[i].granted, std::max(0.0, requests[i].requested));
    }
  }
}

}  // namespace
