#include "pcs/state_model.hpp"

#include <algorithm>

namespace pcs {

namespace {

constexpr std::array<std::string_view, kDangerLevelCount> kDangerNames = {
    "No", "Low", "Medium", "High", "VeryHigh"};

constexpr std::array<std::string_view, kScenarioTypeCount> kScenarioTypeNames = {
    "normal", "recovery", "backup", "soft_shutdown", "disruption_mitigation"};

}  // namespace

std::string_view to_string(DangerLevel d) { return kDangerNames.at(static_cast<std::size_t>(d)); }

std::optional<DangerLevel> parse_danger_level(std::string_view name) {
  for (std::size_t i = 0; i < kDangerNames.size(); ++i) {
    if (kDangerNames[i] == name) return static_cast<DangerLevel>(i);
  }
  return std::nullopt;
}

std::string_view to_string(ScenarioType t) {
  return kScenarioTypeNames.at(static_cast<std::size_t>(t));
}

std::optional<ScenarioType> parse_scenario_type(std::string_view name) {
  for (std::size_t i = 0; i < kScenarioTypeNames.size(); ++i) {
    if (kScenarioTypeNames[i] == name) return static_cast<ScenarioType>(i);
  }
  return std::nullopt;
}

double Waveform::operator()(double time) const {
  if (points.empty()) throw ConfigError("empty waveform");
  if (time <= points.front().first) return points.front().second;
  if (time >= points.back().first) return points.back().second;

  // First breakpoint strictly after `time`; its predecessor starts the segment.
  auto hi = std::upper_bound(points.begin(), points.end(), time,
                             [](double t, const auto& p) { return t < p.first; });
  auto lo = std::prev(hi);
  if (interpolation == Interpolation::Hold) return lo->second;
  const double frac = (time - lo->first) / (hi->first - lo->first);
  return lo->second + frac * (hi->second - lo->second);
}

double Allocation::granted(std::string_view task, std::string_view group) const {
  double sum = 0.0;
  for (const auto& g : grants) {
    if (g.task == task && g.group == group) sum += g.granted;
  }
  return sum;
}

double Allocation::total(std::string_view group) const {
  double sum = 0.0;
  for (const auto& g : grants) {
    if (g.group == group) sum += g.granted;
  }
  return sum;
}

}  // namespace pcs
