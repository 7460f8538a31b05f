#pragma once

// Actuator manager: shares limited actuator-group resources between active
// tasks and combines the controllers' commands into one command per group.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcs/state_model.hpp"

namespace pcs {

enum class GroupSemantics : std::uint8_t {
  Additive,   // commands from all granted tasks are summed (powers, fluxes)
  Exclusive,  // one owner; the highest-priority granted task's command is used
};

struct ActuatorGroup {
  std::string id;
  std::string unit;
  GroupSemantics semantics = GroupSemantics::Additive;
  double capacity = 0.0;
  double availability = 0.0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  double idle = 0.0;  // command emitted when no task contributes

  bool operator==(const ActuatorGroup&) const = default;
};

using TaskPriorities = std::map<std::string, int, std::less<>>;

/// Priority-lexicographic greedy allocation. Tasks are served in ascending
/// priority number; each request gets min(requested, remaining availability)
/// when that reaches its minimum acceptable amount, and 0 otherwise.
/// Throws ConfigError on duplicate (task, group) pairs, unknown groups, or
/// tasks without a priority.
Allocation allocate(std::span<const ResourceRequest> requests,
                    std::span<const ActuatorGroup> groups, const TaskPriorities& priorities);

struct TaskCommand {
  std::string task;
  ActuatorCommand command;
};

struct MergeResult {
  std::vector<ActuatorCommand> commands;  // one per group, in group order
  std::vector<std::string> violations;    // dropped contributions
};

MergeResult merge_commands(std::span<const TaskCommand> outputs, const Allocation& allocation,
                           std::span<const ActuatorGroup> groups,
                           const TaskPriorities& priorities, double time);

}  // namespace pcs
