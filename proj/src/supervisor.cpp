#include "pcs/supervisor.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace pcs {

const Scenario& SupervisorConfig::scenario(std::string_view id) const {
  auto it = std::find_if(scenarios.begin(), scenarios.end(),
                         [&](const Scenario& s) { return s.id == id; });
  if (it == scenarios.end()) throw ConfigError(fmt::format("unknown scenario '{}'", id));
  return *it;
}

SupervisorState SupervisorState::initial(const SupervisorConfig& config) {
  SupervisorState s;
  s.danger.assign(config.ones.size(), DangerLevel::No);
  s.reaction.assign(config.ones.size(), ReactionLevel{0});
  s.floor.assign(config.ones.size(), ReactionLevel{0});
  s.scenario = config.os_mapping.default_scenario;
  return s;
}

DangerLevel danger_step(const EventState& event, const DangerMap& map, DangerLevel previous) {
  if (event.fault) return previous;
  if (event.level < 0 || static_cast<std::size_t>(event.level) >= map.size()) {
    throw ConfigError(fmt::format("ONE '{}': event level {} outside danger map domain [0, {}]",
                                  event.one, event.level, map.size() - 1));
  }
  return map[static_cast<std::size_t>(event.level)];
}

ReactionLevel reaction_step(DangerLevel danger, const ReactionMap& map, ReactionLevel previous,
                            ReactionLevel floor) {
  const auto& entry = map.by_danger[static_cast<std::size_t>(danger)];
  if (!entry) {
    throw ConfigError(fmt::format("reaction map has no entry for danger level {}", to_string(danger)));
  }
  const ReactionLevel candidate = std::max(*entry, floor);
  if (map.is_irreversible(previous)) return std::max(previous, candidate);
  return candidate;
}

std::string map_scenario(std::span<const ReactionLevel> reactions, const OsMapping& mapping,
                         std::span<const Scenario> scenarios) {
  std::vector<int> key;
  key.reserve(reactions.size());
  int worst = 0;
  for (auto r : reactions) {
    key.push_back(r.value());
    worst = std::max(worst, r.value());
  }
  if (auto row = mapping.rows.find(key); row != mapping.rows.end()) return row->second;
  if (worst == 0) return mapping.default_scenario;

  for (int type = worst; type < static_cast<int>(kScenarioTypeCount); ++type) {
    const Scenario* best = nullptr;
    for (const auto& s : scenarios) {
      if (severity(s.type) == type && (best == nullptr || s.id < best->id)) best = &s;
    }
    if (best != nullptr) return best->id;
  }
  return mapping.default_scenario;
}

bool task_is_active(const ControlTask& task, double time, std::span<const EventState> events) {
  const auto& act = task.activation;
  if (act.start && time < *act.start) return false;
  if (act.end && time >= *act.end) return false;
  if (act.trigger) {
    auto it = std::find_if(events.begin(), events.end(),
                           [&](const EventState& e) { return e.one == act.trigger->one; });
    if (it == events.end()) {
      throw ConfigError(fmt::format("task '{}': trigger ONE '{}' not monitored", task.id,
                                    act.trigger->one));
    }
    if (it->level < act.trigger->min_level) return false;
    if (act.trigger->max_level && it->level > *act.trigger->max_level) return false;
  }
  return true;
}

std::vector<ControlTask> activate_tasks(const Scenario& scenario, double time,
                                        std::span<const EventState> events) {
  std::vector<ControlTask> active;
  for (const auto& task : scenario.tasks) {
    if (task_is_active(task, time, events)) active.push_back(task);
  }
  std::stable_sort(active.begin(), active.end(),
                   [](const ControlTask& a, const ControlTask& b) { return a.priority < b.priority; });
  return active;
}

SupervisorOutput supervisor_step(std::span<const EventState> events, const SupervisorState& state,
                                 const SupervisorConfig& config, double time) {
  if (events.size() != config.ones.size()) {
    throw ConfigError(fmt::format("supervisor expects {} event states, got {}",
                                  config.ones.size(), events.size()));
  }
  SupervisorState next = state;
  if (next.danger.size() != config.ones.size()) next = SupervisorState::initial(config);
  next.floor.resize(config.ones.size(), ReactionLevel{0});

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& tables = config.ones[i];
    next.danger[i] = danger_step(events[i], tables.danger, next.danger[i]);
    next.reaction[i] = reaction_step(next.danger[i], tables.reaction, next.reaction[i], next.floor[i]);
    if (tables.reaction.is_irreversible(next.reaction[i])) {
      next.floor[i] = std::max(next.floor[i], next.reaction[i]);
    }
  }

  std::string chosen = map_scenario(next.reaction, config.os_mapping, config.scenarios);
  if (next.terminal_latched && !next.scenario.empty()) {
    // Never step back from soft-shutdown or mitigation to a milder scenario type.
    if (severity(config.scenario(chosen).type) < severity(config.scenario(next.scenario).type)) {
      chosen = next.scenario;
    }
  }
  next.scenario = chosen;
  const Scenario& scenario = config.scenario(chosen);
  if (is_terminal(scenario.type)) next.terminal_latched = true;

  SupervisorOutput out;
  out.scenario = chosen;
  out.tasks = activate_tasks(scenario, time, events);
  out.state = std::move(next);
  return out;
}

}  // namespace pcs
