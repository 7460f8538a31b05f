#include "pcs/event_monitor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace pcs {

int MonitoredOne::levels() const {
  switch (kind) {
    case OneKind::Base:
      return table.levels();
    case OneKind::Virtual:
      return rule.levels;
    case OneKind::PlantFailure:
      return 1;
  }
  return 0;
}

namespace {

// Signed "how far into the worse side" of threshold i the value sits.
double worse_by(const ThresholdTable& table, double value, std::size_t i) {
  return table.direction == Direction::RisingIsWorse ? value - table.thresholds[i]
                                                     : table.thresholds[i] - value;
}

}  // namespace

EventState discretize(const ContinuousSignal& signal, const ThresholdTable& table,
                      int previous_level) {
  if (signal.name != table.signal) {
    throw ConfigError(fmt::format("signal '{}' does not match threshold table for '{}'",
                                  signal.name, table.signal));
  }
  if (previous_level < 0 || previous_level > table.levels()) {
    throw ConfigError(fmt::format("previous level {} outside [0, {}] for '{}'", previous_level,
                                  table.levels(), table.signal));
  }
  if (!std::isfinite(signal.value)) {
    throw MonitorFault(fmt::format("non-finite value on signal '{}'", signal.name));
  }

  // Escalation: highest threshold reached in the worse direction.
  int raised = 0;
  for (std::size_t i = 0; i < table.thresholds.size(); ++i) {
    if (worse_by(table, signal.value, i) >= 0.0) raised = static_cast<int>(i) + 1;
  }

  // De-escalation: leave level L only once the value clears t_L by h_L.
  int held = previous_level;
  while (held > 0) {
    const auto i = static_cast<std::size_t>(held - 1);
    const double h = i < table.hysteresis.size() ? table.hysteresis[i] : 0.0;
    if (worse_by(table, signal.value, i) < -h) {
      --held;
    } else {
      break;
    }
  }

  return EventState{signal.name, std::max(raised, held), signal.time, false};
}

EventState compose_virtual(std::span<const EventState> inputs, const VirtualOneRule& rule) {
  std::vector<int> key;
  key.reserve(rule.inputs.size());
  double time = 0.0;
  for (const auto& name : rule.inputs) {
    auto it = std::find_if(inputs.begin(), inputs.end(),
                           [&](const EventState& e) { return e.one == name; });
    if (it == inputs.end()) {
      throw ConfigError(fmt::format("virtual ONE '{}': missing input '{}'", rule.id, name));
    }
    key.push_back(it->level);
    time = std::max(time, it->time);
  }
  auto row = rule.combiner.find(key);
  if (row == rule.combiner.end()) {
    throw ConfigError(fmt::format("virtual ONE '{}': input tuple ({}) outside combiner domain",
                                  rule.id, fmt::join(key, ",")));
  }
  return EventState{rule.id, row->second, time, false};
}

std::vector<EventState> monitor_step(const SignalFrame& frame, double time,
                                     std::span<const MonitoredOne> ones,
                                     std::span<const EventState> previous) {
  if (!previous.empty() && previous.size() != ones.size()) {
    throw ConfigError("previous event vector does not match the configured ONE list");
  }
  std::vector<EventState> out(ones.size());
  bool any_fault = false;

  for (std::size_t i = 0; i < ones.size(); ++i) {
    const auto& one = ones[i];
    if (one.kind != OneKind::Base) continue;
    const int prev = previous.empty() ? 0 : previous[i].level;
    auto it = frame.find(one.table.signal);
    if (it == frame.end()) {
      throw ConfigError(fmt::format("ONE '{}': signal '{}' not provided", one.id,
                                    one.table.signal));
    }
    try {
      out[i] = discretize(ContinuousSignal{one.table.signal, it->second, time}, one.table, prev);
    } catch (const MonitorFault&) {
      out[i] = EventState{one.id, prev, time, true};
      any_fault = true;
    }
    out[i].one = one.id;
  }

  for (std::size_t i = 0; i < ones.size(); ++i) {
    if (ones[i].kind == OneKind::PlantFailure) {
      out[i] = EventState{ones[i].id, any_fault ? 1 : 0, time, false};
    }
  }

  for (std::size_t i = 0; i < ones.size(); ++i) {
    if (ones[i].kind == OneKind::Virtual) {
      out[i] = compose_virtual(out, ones[i].rule);
      out[i].one = ones[i].id;
    }
  }
  return out;
}

}  // namespace pcs
