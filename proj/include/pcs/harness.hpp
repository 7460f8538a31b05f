#pragma once

// Fixed-period control loop: monitor -> supervisor -> actuator manager ->
// controllers -> plant, with one trace row per tick and a supervisor-only
// replay of recorded event levels.
//
// Tick ordering: the commands merged at tick k drive the plant over
// [t_k, t_k + dt]; their effect is first observed at tick k + 1.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pcs/config.hpp"

namespace pcs {

struct TickRecord {
  double time = 0.0;
  std::vector<EventState> events;
  SupervisorState supervisor;
  std::string scenario;
  std::vector<ControlTask> tasks;
  Allocation allocation;
  std::vector<TaskCommand> task_commands;
  std::vector<ActuatorCommand> commands;  // per group, schedule order
  std::vector<std::string> violations;
};

/// Tokamak-agnostic layer for one schedule. Owns every piece of state that
/// persists between ticks (previous event levels, supervisor state,
/// controller memories, last applied commands).
class ControlLoop {
 public:
  explicit ControlLoop(PulseSchedule schedule);

  TickRecord tick(double time, const SignalFrame& signals);

  const PulseSchedule& schedule() const { return schedule_; }
  const SupervisorState& supervisor_state() const { return supervisor_; }
  /// Last merged command for `group` (its idle value before the first tick).
  double command(std::string_view group) const;

 private:
  struct Memory {
    PidState pid;
    DaGasState gas;
  };

  PulseSchedule schedule_;
  std::vector<MonitoredOne> monitored_;
  SupervisorConfig supervisor_config_;
  std::vector<EventState> events_;
  SupervisorState supervisor_;
  std::map<std::string, Memory, std::less<>> memory_;
  std::map<std::string, double, std::less<>> last_commands_;
};

// ---------------------------------------------------------------------------
// Trace files
// ---------------------------------------------------------------------------

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

std::vector<std::string> trace_columns(const PulseSchedule& schedule);
/// time, per-ONE danger and reaction, scenario, tasks.
std::vector<std::string> decision_columns(const PulseSchedule& schedule);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header, if present.
  std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

enum class RunOutcome : int {
  Completed = 0,
  Disrupted = 2,
  SoftShutdownCompleted = 3,
};

struct RunResult {
  RunOutcome outcome = RunOutcome::Completed;
  std::size_t ticks = 0;
  std::optional<double> disruption_time;
  std::size_t violations = 0;
};

struct RunOptions {
  std::optional<double> until;  // overrides run.duration
};

/// Runs the closed loop against the plant surrogate, writing the trace to
/// `trace`. The schedule must validate without errors.
RunResult run(const PulseSchedule& schedule, std::ostream& trace, const RunOptions& options = {});

struct ReplayResult {
  std::size_t rows = 0;
  std::size_t mismatches = 0;          // decision fields differing from the input trace
  std::vector<std::string> messages;   // first few mismatches
};

/// Re-runs the supervisor alone over the `<one>.level` (and optional
/// `<one>.fault`) columns of a recorded trace and writes the decision
/// columns to `out`. When the input carries decision columns too, they are
/// compared field by field. Throws ConfigError on missing columns or a time
/// column that is not strictly increasing.
ReplayResult replay(std::istream& trace, const PulseSchedule& schedule, std::ostream& out);

}  // namespace pcs
