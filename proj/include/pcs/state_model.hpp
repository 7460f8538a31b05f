#pragma once

// Shared vocabulary of the supervisory control layer: signals, the danger
// and reaction level enumerations, scenario types, and the request/grant
// records exchanged between controllers and the actuator manager.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pcs {

/// Raised for schedule problems: bad documents, unresolved references,
/// out-of-domain lookups at runtime.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A monitored signal was not finite.
class MonitorFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The plant surrogate received an unusable command.
class SimFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContinuousSignal {
  std::string name;
  double value = 0.0;
  double time = 0.0;

  bool operator==(const ContinuousSignal&) const = default;
};

/// Named continuous values available to the monitor and controllers in one tick.
using SignalFrame = std::map<std::string, double, std::less<>>;

// ---------------------------------------------------------------------------
// Danger and reaction levels
// ---------------------------------------------------------------------------

enum class DangerLevel : std::uint8_t { No = 0, Low = 1, Medium = 2, High = 3, VeryHigh = 4 };

inline constexpr std::size_t kDangerLevelCount = 5;

inline constexpr std::array<DangerLevel, kDangerLevelCount> kAllDangerLevels = {
    DangerLevel::No, DangerLevel::Low, DangerLevel::Medium, DangerLevel::High,
    DangerLevel::VeryHigh};

constexpr int to_int(DangerLevel d) { return static_cast<int>(d); }

std::string_view to_string(DangerLevel d);
std::optional<DangerLevel> parse_danger_level(std::string_view name);

/// Reaction level in [0, 4]. Construction outside the range throws.
class ReactionLevel {
 public:
  static constexpr int kMax = 4;
  static constexpr std::size_t kCount = 5;

  constexpr ReactionLevel() = default;
  constexpr explicit ReactionLevel(int level) : level_(level) {
    if (level < 0 || level > kMax) throw ConfigError("reaction level out of range [0,4]");
  }

  constexpr int value() const { return level_; }

  constexpr auto operator<=>(const ReactionLevel&) const = default;

 private:
  int level_ = 0;
};

/// Default irreversible reaction levels: soft-shutdown and mitigation.
inline constexpr std::array<bool, ReactionLevel::kCount> kDefaultIrreversible = {
    false, false, false, true, true};

// ---------------------------------------------------------------------------
// Scenarios and tasks
// ---------------------------------------------------------------------------

/// Ordered by severity; reaction level k corresponds to the k-th type.
enum class ScenarioType : std::uint8_t {
  Normal = 0,
  Recovery = 1,
  Backup = 2,
  SoftShutdown = 3,
  DisruptionMitigation = 4,
};

inline constexpr std::size_t kScenarioTypeCount = 5;

constexpr int severity(ScenarioType t) { return static_cast<int>(t); }
constexpr ScenarioType scenario_type_for(ReactionLevel r) {
  return static_cast<ScenarioType>(r.value());
}
constexpr bool is_terminal(ScenarioType t) {
  return t == ScenarioType::SoftShutdown || t == ScenarioType::DisruptionMitigation;
}

std::string_view to_string(ScenarioType t);
std::optional<ScenarioType> parse_scenario_type(std::string_view name);

enum class Interpolation : std::uint8_t { Hold, Linear };

/// Piecewise waveform over time. Clamped (held) outside the breakpoint range.
struct Waveform {
  std::vector<std::pair<double, double>> points;  // (time s, value)
  Interpolation interpolation = Interpolation::Linear;

  static Waveform constant(double value) { return Waveform{{{0.0, value}}, Interpolation::Hold}; }

  bool empty() const { return points.empty(); }
  double operator()(double time) const;

  bool operator==(const Waveform&) const = default;
};

/// Time-window and/or event-level condition for a task to run.
struct Activation {
  std::optional<double> start;  // inclusive
  std::optional<double> end;    // exclusive

  struct Trigger {
    std::string one;
    int min_level = 1;
    std::optional<int> max_level;

    bool operator==(const Trigger&) const = default;
  };
  std::optional<Trigger> trigger;

  bool operator==(const Activation&) const = default;
};

struct ControlTask {
  std::string id;
  int priority = 1;  // 1 is highest
  std::string controller;
  std::optional<Waveform> reference;
  double min_acceptable = 0.0;
  Activation activation;

  bool operator==(const ControlTask&) const = default;
};

// ---------------------------------------------------------------------------
// Actuator resources
// ---------------------------------------------------------------------------

struct ResourceRequest {
  std::string task;
  std::string group;
  double requested = 0.0;
  double minimum = 0.0;

  bool operator==(const ResourceRequest&) const = default;
};

struct Grant {
  std::string task;
  std::string group;
  double granted = 0.0;

  bool operator==(const Grant&) const = default;
};

/// Grants in request order, plus the tasks that received nothing.
struct Allocation {
  std::vector<Grant> grants;
  std::vector<std::string> starved;

  double granted(std::string_view task, std::string_view group) const;
  double total(std::string_view group) const;
};

struct ActuatorCommand {
  std::string group;
  double value = 0.0;
  double time = 0.0;

  bool operator==(const ActuatorCommand&) const = default;
};

}  // namespace pcs
