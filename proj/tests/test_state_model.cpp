#include <gtest/gtest.h>

#include "pcs/state_model.hpp"

namespace {

using namespace pcs;

TEST(ReactionLevel, AcceptsZeroToFour) {
  for (int i = 0; i <= 4; ++i) EXPECT_EQ(ReactionLevel{i}.value(), i);
  EXPECT_THROW(ReactionLevel{-1}, ConfigError);
  EXPECT_THROW(ReactionLevel{5}, ConfigError);
}

TEST(ReactionLevel, OrdersByValue) {
  EXPECT_LT(ReactionLevel{1}, ReactionLevel{3});
  EXPECT_EQ(ReactionLevel{2}, ReactionLevel{2});
}

TEST(DangerLevel, NamesRoundTrip) {
  for (auto d : kAllDangerLevels) {
    auto parsed = parse_danger_level(to_string(d));
    ASSERT_TRUE(parsed);
    EXPECT_EQ(*parsed, d);
  }
  EXPECT_FALSE(parse_danger_level("Extreme"));
}

TEST(ScenarioType, SeverityFollowsReactionLevel) {
  EXPECT_EQ(scenario_type_for(ReactionLevel{0}), ScenarioType::Normal);
  EXPECT_EQ(scenario_type_for(ReactionLevel{1}), ScenarioType::Recovery);
  EXPECT_EQ(scenario_type_for(ReactionLevel{2}), ScenarioType::Backup);
  EXPECT_EQ(scenario_type_for(ReactionLevel{3}), ScenarioType::SoftShutdown);
  EXPECT_EQ(scenario_type_for(ReactionLevel{4}), ScenarioType::DisruptionMitigation);
  EXPECT_TRUE(is_terminal(ScenarioType::SoftShutdown));
  EXPECT_TRUE(is_terminal(ScenarioType::DisruptionMitigation));
  EXPECT_FALSE(is_terminal(ScenarioType::Backup));
}

TEST(ScenarioType, NamesRoundTrip) {
  for (int i = 0; i < 5; ++i) {
    const auto t = static_cast<ScenarioType>(i);
    EXPECT_EQ(parse_scenario_type(to_string(t)), t);
  }
  EXPECT_EQ(parse_scenario_type("soft_shutdown"), ScenarioType::SoftShutdown);
  EXPECT_FALSE(parse_scenario_type("panic"));
}

TEST(Waveform, LinearInterpolatesAndClamps) {
  Waveform wf{{{0.0, 1.0}, {1.0, 3.0}}, Interpolation::Linear};
  EXPECT_DOUBLE_EQ(wf(-1.0), 1.0);
  EXPECT_DOUBLE_EQ(wf(0.25), 1.5);
  EXPECT_DOUBLE_EQ(wf(2.0), 3.0);
}

TEST(Waveform, HoldKeepsLastBreakpoint) {
  Waveform wf{{{0.0, 1.0}, {1.0, 3.0}, {2.0, 5.0}}, Interpolation::Hold};
  EXPECT_DOUBLE_EQ(wf(0.999), 1.0);
  EXPECT_DOUBLE_EQ(wf(1.0), 3.0);
  EXPECT_DOUBLE_EQ(wf(1.5), 3.0);
  EXPECT_DOUBLE_EQ(wf(9.0), 5.0);
}

TEST(Waveform, ConstantAndEmpty) {
  EXPECT_DOUBLE_EQ(Waveform::constant(0.65)(123.0), 0.65);
  EXPECT_THROW(Waveform{}(0.0), ConfigError);
}

TEST(Allocation, LooksUpGrantsAndTotals) {
  Allocation a{{{"a", "nbi", 0.5}, {"b", "nbi", 0.25}, {"a", "gas", 1.0}}, {}};
  EXPECT_DOUBLE_EQ(a.granted("a", "nbi"), 0.5);
  EXPECT_DOUBLE_EQ(a.granted("c", "nbi"), 0.0);
  EXPECT_DOUBLE_EQ(a.total("nbi"), 0.75);
  EXPECT_DOUBLE_EQ(a.total("ec"), 0.0);
}

}  // namespace
