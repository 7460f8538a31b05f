#pragma once

// Pulse schedule: the pre-shot document describing ONEs, decision tables,
// scenarios and tasks, controllers, actuator groups, the plant surrogate and
// the run settings. Serialized as YAML; see docs/schedule.md for the schema.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcs/actuator_manager.hpp"
#include "pcs/controllers.hpp"
#include "pcs/event_monitor.hpp"
#include "pcs/plant_sim.hpp"
#include "pcs/supervisor.hpp"

namespace pcs {

struct OneConfig {
  MonitoredOne event;
  DangerMap danger;
  ReactionMap reaction;

  const std::string& id() const { return event.id; }

  bool operator==(const OneConfig&) const = default;
};

struct RunParams {
  double dt = 1e-3;        // s
  double duration = 0.0;   // s
  double post_roll = 0.0;  // s simulated after a disruption

  bool operator==(const RunParams&) const = default;
};

struct PulseSchedule {
  std::vector<OneConfig> ones;
  OsMapping os_mapping;
  std::vector<Scenario> scenarios;
  std::vector<ControllerConfig> controllers;
  std::vector<ActuatorGroup> actuator_groups;
  PlantParams plant;
  RunParams run;

  std::vector<MonitoredOne> monitored() const;
  SupervisorConfig supervisor_config() const;

  const ControllerConfig* controller(std::string_view id) const;
  const ActuatorGroup* group(std::string_view id) const;
  const Scenario* scenario(std::string_view id) const;
  const OneConfig* one(std::string_view id) const;

  bool operator==(const PulseSchedule&) const = default;
};

/// `path=value` edits applied to the document tree before it is typed.
/// Path segments walk map keys; in lists they select an element by `id`
/// or by index. The value is read as YAML.
using Override = std::pair<std::string, std::string>;

/// Throws ConfigError with the offending path and line/column.
PulseSchedule parse(std::string_view document, const std::vector<Override>& overrides = {});
PulseSchedule load_schedule(const std::filesystem::path& path,
                            const std::vector<Override>& overrides = {});

/// Canonical YAML for a schedule; parse(serialize(s)) == s.
std::string serialize(const PulseSchedule& schedule);

struct Diagnostic {
  enum class Severity : std::uint8_t { Error, Warning };
  Severity severity = Severity::Error;
  std::string path;
  std::string message;

  std::string to_string() const;
};

/// Semantic checks. Never throws on schedule content.
std::vector<Diagnostic> validate(const PulseSchedule& schedule);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Signals produced by the plant surrogate (scripted signals come on top).
std::span<const std::string_view> plant_signal_names();

}  // namespace pcs
