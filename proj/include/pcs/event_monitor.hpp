#pragma once

// Discretization of continuous signals into per-ONE event levels, and
// virtual ONEs built from combinations of base event levels.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcs/state_model.hpp"

namespace pcs {

enum class Direction : std::uint8_t { RisingIsWorse, FallingIsWorse };

/// Thresholds t_1..t_k on one signal. Crossing t_i in the worse direction
/// raises the level to i; dropping back below level i requires passing
/// t_i by more than hysteresis[i-1] in the better direction.
struct ThresholdTable {
  std::string signal;
  Direction direction = Direction::RisingIsWorse;
  std::vector<double> thresholds;  // strictly increasing (rising) or decreasing (falling)
  std::vector<double> hysteresis;  // same length, each >= 0

  int levels() const { return static_cast<int>(thresholds.size()); }

  bool operator==(const ThresholdTable&) const = default;
};

struct EventState {
  std::string one;
  int level = 0;
  double time = 0.0;
  bool fault = false;  // signal was not finite; level is held from the previous tick

  bool operator==(const EventState&) const = default;
};

/// Maps a tuple of input levels to an output level.
struct VirtualOneRule {
  std::string id;
  std::vector<std::string> inputs;
  int levels = 1;  // highest output level
  std::map<std::vector<int>, int> combiner;

  bool operator==(const VirtualOneRule&) const = default;
};

enum class OneKind : std::uint8_t {
  Base,
  Virtual,
  PlantFailure,  // level 1 while any base ONE's signal is faulted
};

struct MonitoredOne {
  std::string id;
  OneKind kind = OneKind::Base;
  ThresholdTable table;  // Base only
  VirtualOneRule rule;   // Virtual only

  int levels() const;

  bool operator==(const MonitoredOne&) const = default;
};

/// Throws MonitorFault on a non-finite value and ConfigError when the
/// signal name does not match the table or `previous_level` is out of range.
EventState discretize(const ContinuousSignal& signal, const ThresholdTable& table,
                      int previous_level);

/// Combiner lookup. Output time is the latest input time.
EventState compose_virtual(std::span<const EventState> inputs, const VirtualOneRule& rule);

/// One EventState per entry of `ones`, in the same order. Bases are evaluated
/// first, then plant-failure ONEs, then virtual ONEs. A faulted signal holds
/// its ONE at the previous level with `fault` set; other ONEs are unaffected.
/// `previous` may be empty (all levels start at 0).
std::vector<EventState> monitor_step(const SignalFrame& frame, double time,
                                     std::span<const MonitoredOne> ones,
                                     std::span<const EventState> previous);

}  // namespace pcs
