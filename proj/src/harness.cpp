#include "pcs/harness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace pcs {

namespace {

struct Demand {
  std::string group;
  double request = 0.0;
  double minimum = 0.0;
  double command = 0.0;
  bool uses_full_grant = false;  // command is whatever is granted
};

double signal(const SignalFrame& frame, std::string_view name) {
  auto it = frame.find(name);
  if (it == frame.end()) throw ConfigError(fmt::format("signal '{}' not provided", name));
  return it->second;
}

std::string join_ids(const std::vector<std::string>& ids) { return fmt::format("{}", fmt::join(ids, ";")); }

}  // namespace

ControlLoop::ControlLoop(PulseSchedule schedule)
    : schedule_(std::move(schedule)),
      monitored_(schedule_.monitored()),
      supervisor_config_(schedule_.supervisor_config()),
      supervisor_(SupervisorState::initial(supervisor_config_)) {
  for (const auto& g : schedule_.actuator_groups) last_commands_[g.id] = g.idle;
}

double ControlLoop::command(std::string_view group) const {
  auto it = last_commands_.find(group);
  return it == last_commands_.end() ? 0.0 : it->second;
}

TickRecord ControlLoop::tick(double time, const SignalFrame& signals) {
  TickRecord rec;
  rec.time = time;
  rec.events = monitor_step(signals, time, monitored_, events_);

  auto decision = supervisor_step(rec.events, supervisor_, supervisor_config_, time);
  rec.scenario = decision.scenario;
  rec.tasks = std::move(decision.tasks);
  rec.supervisor = std::move(decision.state);

  // Controller memories survive only while some active task binds them.
  for (auto it = memory_.begin(); it != memory_.end();) {
    const bool bound = std::any_of(rec.tasks.begin(), rec.tasks.end(),
                                   [&](const ControlTask& t) { return t.controller == it->first; });
    it = bound ? std::next(it) : memory_.erase(it);
  }

  const double dt = schedule_.run.dt;
  TaskPriorities priorities;
  std::vector<std::pair<const ControlTask*, std::vector<Demand>>> demands;
  std::vector<ResourceRequest> requests;

  for (const auto& task : rec.tasks) {
    priorities[task.id] = task.priority;
    const auto* ctrl = schedule_.controller(task.controller);
    if (ctrl == nullptr) throw ConfigError(fmt::format("unknown controller '{}'", task.controller));
    const auto* group = schedule_.group(ctrl->group);
    if (group == nullptr) throw ConfigError(fmt::format("unknown actuator group '{}'", ctrl->group));
    const bool exclusive = group->semantics == GroupSemantics::Exclusive;
    auto& mem = memory_[ctrl->id];

    auto single = [&](ControllerOutput out) {
      Demand d{ctrl->group, out.request, task.min_acceptable, out.command, false};
      if (exclusive) d.request = d.minimum = 1.0;
      return std::vector<Demand>{d};
    };

    std::vector<Demand> task_demands;
    if (const auto* ff = std::get_if<FeedforwardParams>(&ctrl->params)) {
      task_demands = single(feedforward_step(task.reference ? *task.reference : ff->waveform, time));
    } else if (const auto* pid = std::get_if<PidParams>(&ctrl->params)) {
      const auto& ref = task.reference ? *task.reference : pid->reference.value();
      auto r = pid_step(ref(time), signal(signals, pid->measurement), *pid, mem.pid, dt);
      mem.pid = r.state;
      task_demands = single(r.output);
    } else if (const auto* dp = std::get_if<DaPowerParams>(&ctrl->params)) {
      task_demands = single(da_power_step(signal(signals, dp->distance_signal), dp->d_critical1,
                                          dp->gain, dp->p_max, dp->mode));
    } else if (const auto* dg = std::get_if<DaGasParams>(&ctrl->params)) {
      const double applied = command(ctrl->group);
      double base = applied;
      if (!dg->base.empty()) {
        const auto* base_ctrl = schedule_.controller(dg->base);
        if (base_ctrl == nullptr) throw ConfigError(fmt::format("unknown controller '{}'", dg->base));
        base = std::get<FeedforwardParams>(base_ctrl->params).waveform(time);
      }
      auto r = da_gas_step(base, applied, *dg, mem.gas, time);
      mem.gas = r.state;
      task_demands = single({r.command, r.command});
    } else if (const auto* ntm = std::get_if<NtmParams>(&ctrl->params)) {
      const double rho = signal(signals, ntm->position_signal);
      const double want = ntm->power_request.value_or(group->availability);
      task_demands.push_back(Demand{ctrl->group, want, task.min_acceptable, 0.0, true});
      task_demands.push_back(Demand{ntm->launcher_group, 1.0, 1.0, ntm_step(rho, 0.0).deposition, false});
    }

    for (const auto& d : task_demands) requests.push_back({task.id, d.group, d.request, d.minimum});
    demands.emplace_back(&task, std::move(task_demands));
  }

  rec.allocation = allocate(requests, schedule_.actuator_groups, priorities);

  for (const auto& [task, task_demands] : demands) {
    for (const auto& d : task_demands) {
      const double grant = rec.allocation.granted(task->id, d.group);
      if (grant <= 0.0) continue;  // starved on this group: nothing to command
      const auto* group = schedule_.group(d.group);
      double value = d.command;
      if (group->semantics == GroupSemantics::Additive) {
        value = d.uses_full_grant ? grant : std::min(d.command, grant);
      }
      rec.task_commands.push_back(TaskCommand{task->id, ActuatorCommand{d.group, value, time}});
    }
  }

  auto merged = merge_commands(rec.task_commands, rec.allocation, schedule_.actuator_groups,
                               priorities, time);
  rec.commands = std::move(merged.commands);
  rec.violations = std::move(merged.violations);
  for (const auto& c : rec.commands) last_commands_[c.group] = c.value;

  events_ = rec.events;
  supervisor_ = rec.supervisor;
  return rec;
}

// ---------------------------------------------------------------------------
// Trace formatting
// ---------------------------------------------------------------------------

std::string format_number(double value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

namespace {

constexpr std::array<std::string_view, 8> kPlantColumns = {
    "H98y2", "ne_edge_norm", "W", "nbi_power", "nbi_energy", "gas_flux", "d_ne_edge", "disrupted"};

// Every (task id, group) pair any scenario can command, in first-seen order.
std::vector<std::pair<std::string, std::string>> task_group_pairs(const PulseSchedule& ps) {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](const std::string& task, const std::string& group) {
    std::pair<std::string, std::string> p{task, group};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  };
  for (const auto& s : ps.scenarios) {
    for (const auto& t : s.tasks) {
      const auto* c = ps.controller(t.controller);
      if (c == nullptr) continue;
      add(t.id, c->group);
      if (const auto* ntm = std::get_if<NtmParams>(&c->params)) add(t.id, ntm->launcher_group);
    }
  }
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  out << fmt::format("{}", fmt::join(fields, ",")) << '\n';
}

}  // namespace

std::vector<std::string> trace_columns(const PulseSchedule& ps) {
  std::vector<std::string> cols{"time"};
  for (const auto& one : ps.ones) {
    for (const char* suffix : {"signal", "level", "fault", "danger", "reaction"}) {
      cols.push_back(fmt::format("{}.{}", one.id(), suffix));
    }
  }
  cols.insert(cols.end(), {"scenario", "tasks", "starved"});
  for (const auto& g : ps.actuator_groups) {
    cols.push_back(fmt::format("{}.granted", g.id));
    cols.push_back(fmt::format("{}.command", g.id));
  }
  for (const auto& [task, group] : task_group_pairs(ps)) cols.push_back(fmt::format("{}@{}", task, group));
  for (auto c : kPlantColumns) cols.push_back(fmt::format("plant.{}", c));
  return cols;
}

std::vector<std::string> decision_columns(const PulseSchedule& ps) {
  std::vector<std::string> cols{"time"};
  for (const auto& one : ps.ones) {
    cols.push_back(fmt::format("{}.danger", one.id()));
    cols.push_back(fmt::format("{}.reaction", one.id()));
  }
  cols.insert(cols.end(), {"scenario", "tasks"});
  return cols;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(header.begin(), it));
}

CsvTable read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
  };
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) return table;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.rows.push_back(split(line));
  }
  return table;
}

namespace {

std::vector<std::string> decision_fields(const std::string& time, const SupervisorState& state,
                                         const std::string& scenario,
                                         const std::vector<ControlTask>& tasks) {
  std::vector<std::string> f{time};
  for (std::size_t i = 0; i < state.danger.size(); ++i) {
    f.emplace_back(to_string(state.danger[i]));
    f.push_back(std::to_string(state.reaction[i].value()));
  }
  f.push_back(scenario);
  std::vector<std::string> ids;
  ids.reserve(tasks.size());
  for (const auto& t : tasks) ids.push_back(t.id);
  f.push_back(join_ids(ids));
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// Closed-loop run
// ---------------------------------------------------------------------------

RunResult run(const PulseSchedule& schedule, std::ostream& trace, const RunOptions& options) {
  ControlLoop loop(schedule);
  const auto& params = schedule.plant;
  const auto columns = trace_columns(schedule);
  const auto pairs = task_group_pairs(schedule);
  write_row(trace, columns);

  const double dt = schedule.run.dt;
  const double duration = options.until.value_or(schedule.run.duration);
  const auto ticks = static_cast<std::size_t>(std::max(0.0, std::floor(duration / dt + 1e-9)));

  PlantState plant = initial_plant_state(params);
  RunResult result;
  std::vector<std::string> fields;
  fields.reserve(columns.size());

  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * dt;
    const SignalFrame signals = plant_signals(plant, params, t);
    const TickRecord rec = loop.tick(t, signals);
    result.violations += rec.violations.size();

    fields.clear();
    fields.push_back(format_number(t));
    for (std::size_t i = 0; i < schedule.ones.size(); ++i) {
      const auto& one = schedule.ones[i];
      const auto& ev = rec.events[i];
      fields.push_back(one.event.kind == OneKind::Base
                           ? format_number(signals.at(one.event.table.signal))
                           : std::string());
      fields.push_back(std::to_string(ev.level));
      fields.push_back(ev.fault ? "1" : "0");
      fields.emplace_back(to_string(rec.supervisor.danger[i]));
      fields.push_back(std::to_string(rec.supervisor.reaction[i].value()));
    }
    fields.push_back(rec.scenario);
    std::vector<std::string> ids;
    for (const auto& task : rec.tasks) ids.push_back(task.id);
    fields.push_back(join_ids(ids));
    fields.push_back(join_ids(rec.allocation.starved));
    for (std::size_t g = 0; g < schedule.actuator_groups.size(); ++g) {
      fields.push_back(format_number(rec.allocation.total(schedule.actuator_groups[g].id)));
      fields.push_back(format_number(rec.commands[g].value));
    }
    for (const auto& [task, group] : pairs) {
      double v = 0.0;
      for (const auto& tc : rec.task_commands) {
        if (tc.task == task && tc.command.group == group) v = tc.command.value;
      }
      fields.push_back(format_number(v));
    }
    fields.push_back(format_number(plant.H98y2));
    fields.push_back(format_number(plant.ne_edge_norm));
    fields.push_back(format_number(plant.W));
    fields.push_back(format_number(plant.nbi_power));
    fields.push_back(format_number(plant.nbi_energy));
    fields.push_back(format_number(plant.gas_flux));
    fields.push_back(format_number(signals.at("d_ne_edge")));
    fields.push_back(plant.disrupted ? "1" : "0");
    write_row(trace, fields);
    result.ticks = k + 1;

    if (plant.disrupted) {
      if (!result.disruption_time) result.disruption_time = t;
      if (t - *result.disruption_time >= schedule.run.post_roll - 1e-12) break;
    }
    const auto* scenario = schedule.scenario(rec.scenario);
    if (!plant.disrupted && scenario != nullptr && scenario->type == ScenarioType::SoftShutdown &&
        loop.command(params.nbi_group) <= 0.0 && loop.command(params.gas_group) <= 0.0) {
      result.outcome = RunOutcome::SoftShutdownCompleted;
      return result;
    }

    plant = plant_step(PlantCommands{loop.command(params.nbi_group), loop.command(params.gas_group)},
                       plant, dt, params);
  }
  if (result.disruption_time) result.outcome = RunOutcome::Disrupted;
  return result;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

ReplayResult replay(std::istream& trace, const PulseSchedule& schedule, std::ostream& out) {
  const CsvTable table = read_csv(trace);
  const auto time_col = table.column("time");
  if (!time_col) throw ConfigError("trace has no 'time' column");

  std::vector<std::size_t> level_cols;
  std::vector<std::optional<std::size_t>> fault_cols;
  for (const auto& one : schedule.ones) {
    auto col = table.column(fmt::format("{}.level", one.id()));
    if (!col) {
      throw ConfigError(fmt::format("trace has no '{}.level' column for ONE '{}'", one.id(), one.id()));
    }
    level_cols.push_back(*col);
    fault_cols.push_back(table.column(fmt::format("{}.fault", one.id())));
  }
  const auto columns = decision_columns(schedule);
  std::vector<std::optional<std::size_t>> compare_cols;
  for (const auto& c : columns) compare_cols.push_back(table.column(c));

  auto parse_int = [](const std::string& s, std::size_t row, std::string_view what) {
    int v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
      throw ConfigError(fmt::format("row {}: bad {} '{}'", row + 1, what, s));
    }
    return v;
  };

  const auto config = schedule.supervisor_config();
  SupervisorState state = SupervisorState::initial(config);
  ReplayResult result;
  write_row(out, columns);

  std::optional<double> last_time;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      throw ConfigError(fmt::format("row {}: {} fields, header has {}", r + 1, row.size(), table.header.size()));
    }
    const std::string& time_text = row[*time_col];
    double time = 0.0;
    auto [end, ec] = std::from_chars(time_text.data(), time_text.data() + time_text.size(), time);
    if (ec != std::errc{} || end != time_text.data() + time_text.size()) {
      throw ConfigError(fmt::format("row {}: bad time '{}'", r + 1, time_text));
    }
    if (last_time && !(time > *last_time)) {
      throw ConfigError(fmt::format("row {}: time {} does not increase (previous {})", r + 1,
                                    time_text, format_number(*last_time)));
    }
    last_time = time;

    std::vector<EventState> events;
    events.reserve(schedule.ones.size());
    for (std::size_t i = 0; i < schedule.ones.size(); ++i) {
      EventState ev;
      ev.one = schedule.ones[i].id();
      ev.level = parse_int(row[level_cols[i]], r, "level");
      ev.time = time;
      ev.fault = fault_cols[i] && row[*fault_cols[i]] == "1";
      events.push_back(std::move(ev));
    }
    auto decision = supervisor_step(events, state, config, time);
    state = decision.state;

    const auto fields = decision_fields(time_text, state, decision.scenario, decision.tasks);
    write_row(out, fields);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (compare_cols[c] && row[*compare_cols[c]] != fields[c]) {
        if (result.messages.size() < 10) {
          result.messages.push_back(fmt::format("row {} column {}: trace '{}', replay '{}'", r + 1,
                                                columns[c], row[*compare_cols[c]], fields[c]));
        }
        ++result.mismatches;
      }
    }
    ++result.rows;
  }
  return result;
}

}  // namespace pcs
