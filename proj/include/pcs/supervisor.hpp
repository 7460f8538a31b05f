#pragma once

// Supervisor decision chain: event level -> danger level -> reaction level
// per ONE, then the OS mapping from the reaction tuple to a scenario, then
// activation of that scenario's tasks.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcs/event_monitor.hpp"
#include "pcs/state_model.hpp"

namespace pcs {

/// Danger level indexed by event level; must cover [0, levels].
using DangerMap = std::vector<DangerLevel>;

/// Reaction level per danger level. Entries may be missing in a schedule
/// that has not been validated; looking one up then throws ConfigError.
struct ReactionMap {
  std::array<std::optional<ReactionLevel>, kDangerLevelCount> by_danger{};
  std::array<bool, ReactionLevel::kCount> irreversible = kDefaultIrreversible;

  bool is_irreversible(ReactionLevel r) const {
    return irreversible[static_cast<std::size_t>(r.value())];
  }

  bool operator==(const ReactionMap&) const = default;
};

struct OneDecisionTables {
  std::string one;
  DangerMap danger;
  ReactionMap reaction;

  bool operator==(const OneDecisionTables&) const = default;
};

struct OsMapping {
  std::map<std::vector<int>, std::string> rows;  // reaction tuple -> scenario id
  std::string default_scenario;

  bool operator==(const OsMapping&) const = default;
};

struct Scenario {
  std::string id;
  ScenarioType type = ScenarioType::Normal;
  std::vector<ControlTask> tasks;

  bool operator==(const Scenario&) const = default;
};

struct SupervisorConfig {
  std::vector<OneDecisionTables> ones;  // same order as the monitor's ONE list
  OsMapping os_mapping;
  std::vector<Scenario> scenarios;

  const Scenario& scenario(std::string_view id) const;
};

struct SupervisorState {
  std::vector<DangerLevel> danger;
  std::vector<ReactionLevel> reaction;
  // Highest irreversible reaction level returned so far, per ONE.
  std::vector<ReactionLevel> floor;
  std::string scenario;
  // Set once a soft-shutdown or mitigation scenario has been entered.
  bool terminal_latched = false;

  static SupervisorState initial(const SupervisorConfig& config);

  bool operator==(const SupervisorState&) const = default;
};

struct SupervisorOutput {
  std::string scenario;
  std::vector<ControlTask> tasks;  // ascending priority
  SupervisorState state;
};

/// Memoryless lookup. A faulted event keeps `previous`.
DangerLevel danger_step(const EventState& event, const DangerMap& map, DangerLevel previous);

/// Mapped reaction, except that a previous level in the irreversible set is
/// never left downward: the result is max(previous, mapped). The result is
/// also never below `floor`, so an irreversible level stays a lower bound
/// after escalating to a level outside the set.
ReactionLevel reaction_step(DangerLevel danger, const ReactionMap& map, ReactionLevel previous,
                            ReactionLevel floor = ReactionLevel{0});

/// Exact row match; otherwise the scenario of the type matching the highest
/// reaction level (lowest id among that type). Type 0, or a type with no
/// configured scenario, resolves upward in severity and finally to the default.
std::string map_scenario(std::span<const ReactionLevel> reactions, const OsMapping& mapping,
                         std::span<const Scenario> scenarios);

bool task_is_active(const ControlTask& task, double time, std::span<const EventState> events);

std::vector<ControlTask> activate_tasks(const Scenario& scenario, double time,
                                        std::span<const EventState> events);

SupervisorOutput supervisor_step(std::span<const EventState> events, const SupervisorState& state,
                                 const SupervisorConfig& config, double time);

}  // namespace pcs
