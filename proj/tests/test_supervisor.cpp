#include <gtest/gtest.h>

#include <random>

#include "bridge.hpp"
#include "oracles.hpp"
#include "pcs/supervisor.hpp"

namespace {

using namespace pcs;

OneDecisionTables tables(std::string id, DangerMap danger, std::array<int, 5> reaction) {
  OneDecisionTables t{std::move(id), std::move(danger), {}};
  for (std::size_t i = 0; i < 5; ++i) t.reaction.by_danger[i] = ReactionLevel{reaction[i]};
  return t;
}

using D = DangerLevel;

// Two ONEs where each may ask for recovery on its own or together.
SupervisorConfig two_recoveries() {
  SupervisorConfig c;
  c.ones.push_back(tables("A", {D::No, D::Low, D::High}, {0, 1, 1, 3, 4}));
  c.ones.push_back(tables("B", {D::No, D::Low}, {0, 1, 1, 1, 1}));
  c.os_mapping.default_scenario = "normal";
  c.os_mapping.rows = {{{0, 0}, "normal"},
                       {{1, 0}, "recovery_1"},
                       {{0, 1}, "recovery_2"},
                       {{1, 1}, "recovery_3"}};
  c.scenarios = {{"normal", ScenarioType::Normal, {}},
                 {"recovery_1", ScenarioType::Recovery, {}},
                 {"recovery_2", ScenarioType::Recovery, {}},
                 {"recovery_3", ScenarioType::Recovery, {}},
                 {"shutdown", ScenarioType::SoftShutdown, {}}};
  return c;
}

std::vector<EventState> events(int a, int b, bool fault_a = false) {
  return {{"A", a, 0.0, fault_a}, {"B", b, 0.0, false}};
}

std::vector<std::string> scenario_trace(const SupervisorConfig& c, const std::vector<std::pair<int, int>>& seq) {
  auto state = SupervisorState::initial(c);
  std::vector<std::string> out;
  for (auto [a, b] : seq) {
    auto step = supervisor_step(events(a, b), state, c, 0.0);
    state = step.state;
    out.push_back(step.scenario);
  }
  return out;
}

TEST(Supervisor, SelectsRecoveryPerOne) {
  const auto c = two_recoveries();
  EXPECT_EQ(scenario_trace(c, {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}),
            (std::vector<std::string>{"normal", "recovery_1", "recovery_3", "recovery_2", "normal"}));
}

TEST(Supervisor, IrreversibleReactionLatchesScenario) {
  const auto c = two_recoveries();
  // A reaches High -> reaction 3 (no row: severity fallback to soft shutdown), then recovers.
  EXPECT_EQ(scenario_trace(c, {{1, 0}, {2, 0}, {0, 0}, {0, 1}}),
            (std::vector<std::string>{"recovery_1", "shutdown", "shutdown", "shutdown"}));
}

TEST(Supervisor, FaultPinsDanger) {
  const auto c = two_recoveries();
  auto s = SupervisorState::initial(c);
  s = supervisor_step(events(1, 0), s, c, 0.0).state;
  EXPECT_EQ(s.danger[0], D::Low);
  s = supervisor_step(events(0, 0, true), s, c, 0.0).state;
  EXPECT_EQ(s.danger[0], D::Low);
  EXPECT_EQ(s.scenario, "recovery_1");
}

TEST(DangerStep, OutOfDomainLevelIsConfigError) {
  EXPECT_THROW(danger_step({"A", 3, 0.0, false}, {D::No, D::Low}, D::No), ConfigError);
}

TEST(ReactionStep, MissingEntryIsConfigError) {
  ReactionMap m;
  m.by_danger[0] = ReactionLevel{0};
  EXPECT_THROW(reaction_step(D::Low, m, ReactionLevel{0}), ConfigError);
}

TEST(MapScenario, FallbackClimbsSeverity) {
  OsMapping m{{{{0, 0}, "n"}}, "n"};
  std::vector<Scenario> sc{{"n", ScenarioType::Normal, {}},
                           {"b2", ScenarioType::Backup, {}},
                           {"b1", ScenarioType::Backup, {}},
                           {"m", ScenarioType::DisruptionMitigation, {}}};
  std::vector<ReactionLevel> r{ReactionLevel{2}, ReactionLevel{0}};
  EXPECT_EQ(map_scenario(r, m, sc), "b1");  // lowest id of the matching type
  r[0] = ReactionLevel{1};
  EXPECT_EQ(map_scenario(r, m, sc), "b1");  // no recovery scenario: climb to backup
  r[0] = ReactionLevel{3};
  EXPECT_EQ(map_scenario(r, m, sc), "m");
  sc.pop_back();
  EXPECT_EQ(map_scenario(r, m, sc), "n");  // nothing at or above: default
}

TEST(ActivateTasks, WindowsTriggersAndPriorityOrder) {
  Scenario s{"s", ScenarioType::Normal, {}};
  s.tasks.push_back(ControlTask{"late", 3, "c", {}, 0.0, Activation{0.5, std::nullopt, std::nullopt}});
  s.tasks.push_back(ControlTask{"window", 1, "c", {}, 0.0, Activation{0.1, 0.2, std::nullopt}});
  s.tasks.push_back(ControlTask{"trig", 2, "c", {}, 0.0, Activation{std::nullopt, std::nullopt, Activation::Trigger{"A", 1, 1}}});
  auto ids = [&](double t, int level) {
    std::vector<std::string> out;
    std::vector<EventState> ev{{"A", level, t, false}};
    for (const auto& task : activate_tasks(s, t, ev)) out.push_back(task.id);
    return out;
  };
  EXPECT_EQ(ids(0.0, 0), std::vector<std::string>{});
  EXPECT_EQ(ids(0.1, 1), (std::vector<std::string>{"window", "trig"}));
  EXPECT_EQ(ids(0.2, 2), std::vector<std::string>{});
  EXPECT_EQ(ids(0.6, 1), (std::vector<std::string>{"trig", "late"}));
}

TEST(ActivateTasks, UnknownTriggerIsConfigError) {
  ControlTask t{"x", 1, "c", {}, 0.0, Activation{std::nullopt, std::nullopt, Activation::Trigger{"Z", 1, {}}}};
  EXPECT_THROW(task_is_active(t, 0.0, {}), ConfigError);
}

// Random tables with 1-3 ONEs, compared step by step with the table interpreter.
oracle::Tables random_tables(std::mt19937_64& rng, std::vector<int>& levels) {
  std::uniform_int_distribution<int> r5(0, 4);
  oracle::Tables t;
  const int n = std::uniform_int_distribution<int>(1, 3)(rng);
  levels.clear();
  for (int i = 0; i < n; ++i) {
    oracle::OneTables one;
    const int lv = std::uniform_int_distribution<int>(1, 3)(rng);
    levels.push_back(lv);
    for (int k = 0; k <= lv; ++k) one.danger.push_back(r5(rng));
    for (int k = 0; k < 5; ++k) one.reaction.push_back(r5(rng));
    one.irreversible = {false, false, r5(rng) == 0, r5(rng) != 0, true};
    t.ones.push_back(one);
  }
  t.scenarios = {{"n0", 0}, {"n1", 0}};
  for (int k = 0; k < 6; ++k) t.scenarios.push_back({"s" + std::to_string(k), r5(rng)});
  t.default_scenario = "n0";
  for (int k = 0; k < 6; ++k) {
    std::vector<int> key;
    for (int i = 0; i < n; ++i) key.push_back(r5(rng));
    const auto& s = t.scenarios[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 7)(rng))];
    bool dup = false;
    for (const auto& [k2, _] : t.rows) dup = dup || k2 == key;
    if (!dup) t.rows.emplace_back(key, s.id);
  }
  return t;
}

TEST(Supervisor, MatchesTableInterpreterOnRandomSequences) {
  std::mt19937_64 rng(11);
  std::vector<int> levels;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto t = random_tables(rng, levels);
    const auto config = bridge::to_config(t);
    std::vector<oracle::Step> steps;
    for (int k = 0; k < 30; ++k) {
      oracle::Step s;
      for (int lv : levels) {
        s.levels.push_back(std::uniform_int_distribution<int>(0, lv)(rng));
        s.faults.push_back(std::bernoulli_distribution(0.05)(rng));
      }
      steps.push_back(s);
    }
    const auto expected = oracle::interpret(t, steps);
    auto state = SupervisorState::initial(config);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      state = supervisor_step(bridge::to_events(steps[k], 0.0), state, config, 0.0).state;
      ASSERT_EQ(bridge::to_decision(state), expected[k]) << "trial " << trial << " step " << k;
    }
  }
}

TEST(Supervisor, ReactionNeverLeavesIrreversibleSetDownward) {
  std::mt19937_64 rng(5);
  std::vector<int> levels;
  for (int trial = 0; trial < 500; ++trial) {
    const auto t = random_tables(rng, levels);
    const auto config = bridge::to_config(t);
    auto state = SupervisorState::initial(config);
    std::vector<int> entered(levels.size(), -1);
    for (int k = 0; k < 50; ++k) {
      oracle::Step s;
      for (int lv : levels) s.levels.push_back(std::uniform_int_distribution<int>(0, lv)(rng));
      state = supervisor_step(bridge::to_events(s, 0.0), state, config, 0.0).state;
      for (std::size_t i = 0; i < levels.size(); ++i) {
        const int r = state.reaction[i].value();
        ASSERT_GE(r, entered[i]) << "trial " << trial << " step " << k;
        if (config.ones[i].reaction.is_irreversible(state.reaction[i])) entered[i] = std::max(entered[i], r);
      }
    }
  }
}

// Irreversible {2, 4}: escalating 2 -> 3 leaves the set, yet 2 stays a floor.
TEST(Supervisor, IrreversibleLevelStaysAFloorAfterEscalation) {
  auto c = two_recoveries();
  c.ones[0] = tables("A", {D::No, D::Low, D::Medium, D::High}, {0, 1, 2, 3, 4});
  c.ones[0].reaction.irreversible = {false, false, true, false, true};
  auto state = SupervisorState::initial(c);
  std::vector<int> got;
  for (int level : {2, 3, 1, 0}) {
    state = supervisor_step(events(level, 0), state, c, 0.0).state;
    got.push_back(state.reaction[0].value());
  }
  EXPECT_EQ(got, (std::vector<int>{2, 3, 2, 2}));
}

}  // namespace
