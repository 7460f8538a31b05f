#include "pcs/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace pcs {

namespace {

constexpr std::array<std::string_view, 8> kPlantSignals = {
    "H98y2", "ne_edge_norm", "W", "nbi_power", "nbi_energy", "gas_flux", "d_ne_edge",
    "nbi_energy_frac"};

// ---------------------------------------------------------------------------
// Reading helpers
// ---------------------------------------------------------------------------

[[noreturn]] void fail(const YAML::Node& node, std::string_view path, std::string_view message) {
  const auto mark = node.Mark();
  if (mark.is_null()) throw ConfigError(fmt::format("{}: {}", path, message));
  throw ConfigError(
      fmt::format("{}: {} (line {}, column {})", path, message, mark.line + 1, mark.column + 1));
}

std::string join(std::string_view path, std::string_view key) {
  return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

std::string join(std::string_view path, std::size_t index) {
  return fmt::format("{}[{}]", path, index);
}

void expect_map(const YAML::Node& node, std::string_view path) {
  if (!node.IsMap()) fail(node, path, "expected a mapping");
}

void expect_seq(const YAML::Node& node, std::string_view path) {
  if (!node.IsSequence()) fail(node, path, "expected a list");
}

// Strict schema: every key of `node` must be listed.
void check_keys(const YAML::Node& node, std::string_view path,
                std::initializer_list<std::string_view> allowed) {
  expect_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(kv.first, path, fmt::format("unknown key '{}'", key));
    }
  }
}

YAML::Node require(const YAML::Node& map, std::string_view path, const char* key) {
  YAML::Node child = map[key];
  if (!child || child.IsNull()) fail(map, path, fmt::format("missing required key '{}'", key));
  return child;
}

std::string text(const YAML::Node& node, std::string_view path) {
  if (!node.IsScalar()) fail(node, path, "expected a scalar");
  return node.Scalar();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

struct UnitScale {
  std::string_view suffix;
  std::string_view base;
  double scale;
};

constexpr std::array<UnitScale, 6> kUnits = {{
    {"s", "s", 1.0},
    {"ms", "s", 1e-3},
    {"MW", "MW", 1.0},
    {"kW", "MW", 1e-3},
    {"MJ", "MJ", 1.0},
    {"kJ", "MJ", 1e-3},
}};

// Decimal number with an optional unit suffix that must be compatible with
// `unit`. An empty `unit` accepts no suffix.
double number(const YAML::Node& node, std::string_view path, std::string_view unit = {}) {
  const std::string raw = text(node, path);
  std::string_view s = trim(raw);
  double value = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  const auto consumed = static_cast<std::size_t>(end - s.data());
  const std::string_view suffix = trim(s.substr(consumed));
  const bool bad_suffix = !suffix.empty() && !std::isalpha(static_cast<unsigned char>(suffix.front()));
  if (ec != std::errc{} || bad_suffix) {
    fail(node, path, fmt::format("'{}' is not a decimal number", raw));
  }
  if (!std::isfinite(value)) fail(node, path, "number must be finite");
  if (!suffix.empty()) {
    auto it = std::find_if(kUnits.begin(), kUnits.end(),
                           [&](const UnitScale& u) { return u.suffix == suffix; });
    if (unit.empty()) fail(node, path, fmt::format("unit '{}' not allowed here", suffix));
    // "*" defers the compatibility check to a later pass.
    if (it == kUnits.end() || (unit != "*" && it->base != unit)) {
      fail(node, path, fmt::format("unit '{}' is not compatible with '{}'", suffix, unit));
    }
    value *= it->scale;
  }
  return value;
}

int integer(const YAML::Node& node, std::string_view path) {
  const std::string raw = text(node, path);
  const std::string_view s = trim(raw);
  int value = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    fail(node, path, fmt::format("'{}' is not an integer", raw));
  }
  return value;
}

bool boolean(const YAML::Node& node, std::string_view path) {
  const std::string s = text(node, path);
  if (s == "true") return true;
  if (s == "false") return false;
  fail(node, path, fmt::format("'{}' is not true/false", s));
}

std::string identifier(const YAML::Node& node, std::string_view path) {
  std::string s = text(node, path);
  const bool ok = !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
  if (!ok) fail(node, path, fmt::format("'{}' is not a valid identifier", s));
  return s;
}

template <typename T, typename F>
std::vector<T> list(const YAML::Node& node, std::string_view path, F&& item) {
  expect_seq(node, path);
  std::vector<T> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(item(node[i], join(path, i)));
  return out;
}

std::vector<double> numbers(const YAML::Node& node, std::string_view path,
                            std::string_view unit = {}) {
  return list<double>(node, path,
                      [&](const YAML::Node& n, const std::string& p) { return number(n, p, unit); });
}

std::vector<int> integers(const YAML::Node& node, std::string_view path) {
  return list<int>(node, path, [](const YAML::Node& n, const std::string& p) { return integer(n, p); });
}

std::vector<std::pair<double, double>> pairs(const YAML::Node& node, std::string_view path,
                                             std::string_view x_unit = {},
                                             std::string_view y_unit = {}) {
  return list<std::pair<double, double>>(
      node, path, [&](const YAML::Node& n, const std::string& p) {
        expect_seq(n, p);
        if (n.size() != 2) fail(n, p, "expected a [x, y] pair");
        return std::pair{number(n[0], join(p, std::size_t{0}), x_unit),
                         number(n[1], join(p, std::size_t{1}), y_unit)};
      });
}

Waveform waveform(const YAML::Node& node, std::string_view path, std::string_view unit) {
  if (node.IsScalar()) return Waveform::constant(number(node, path, unit));
  check_keys(node, path, {"interpolation", "points"});
  Waveform wf;
  if (auto interp = node["interpolation"]) {
    const auto s = text(interp, join(path, "interpolation"));
    if (s == "hold") {
      wf.interpolation = Interpolation::Hold;
    } else if (s == "linear") {
      wf.interpolation = Interpolation::Linear;
    } else {
      fail(interp, join(path, "interpolation"), "expected 'hold' or 'linear'");
    }
  }
  wf.points = pairs(require(node, path, "points"), join(path, "points"), "s", unit);
  return wf;
}

std::string_view signal_unit(std::string_view signal) {
  if (signal == "W" || signal == "nbi_energy") return "MJ";
  if (signal == "nbi_power") return "MW";
  return {};
}

// ---------------------------------------------------------------------------
// Sections
// ---------------------------------------------------------------------------

RunParams parse_run(const YAML::Node& node, std::string_view path) {
  check_keys(node, path, {"dt", "duration", "post_roll"});
  RunParams run;
  run.dt = number(require(node, path, "dt"), join(path, "dt"), "s");
  run.duration = number(require(node, path, "duration"), join(path, "duration"), "s");
  if (auto n = node["post_roll"]) run.post_roll = number(n, join(path, "post_roll"), "s");
  return run;
}

PlantParams parse_plant(const YAML::Node& node, std::string_view path) {
  check_keys(node, path,
             {"tau_E", "tau_98", "tau_n", "k_gas", "P_ohmic", "nbi_energy_limit", "initial",
              "degradation", "boundary", "inputs", "scripted"});
  PlantParams p;
  p.tau_E = number(require(node, path, "tau_E"), join(path, "tau_E"), "s");
  p.tau_98 = number(require(node, path, "tau_98"), join(path, "tau_98"), "s");
  p.tau_n = number(require(node, path, "tau_n"), join(path, "tau_n"), "s");
  p.k_gas = number(require(node, path, "k_gas"), join(path, "k_gas"));
  if (auto n = node["P_ohmic"]) p.P_ohmic = number(n, join(path, "P_ohmic"), "MW");
  if (auto n = node["nbi_energy_limit"]) {
    p.nbi_energy_limit = number(n, join(path, "nbi_energy_limit"), "MJ");
  }
  if (auto init = node["initial"]) {
    const auto ip = join(path, "initial");
    check_keys(init, ip, {"W", "ne_edge_norm"});
    if (auto n = init["W"]) p.initial_W = number(n, join(ip, "W"), "MJ");
    if (auto n = init["ne_edge_norm"]) p.initial_ne_edge_norm = number(n, join(ip, "ne_edge_norm"));
  }
  p.degradation = pairs(require(node, path, "degradation"), join(path, "degradation"));
  p.boundary.vertices = pairs(require(node, path, "boundary"), join(path, "boundary"));

  const auto inputs = require(node, path, "inputs");
  const auto inp = join(path, "inputs");
  check_keys(inputs, inp, {"nbi_power", "gas_flux"});
  p.nbi_group = identifier(require(inputs, inp, "nbi_power"), join(inp, "nbi_power"));
  p.gas_group = identifier(require(inputs, inp, "gas_flux"), join(inp, "gas_flux"));

  if (auto scripted = node["scripted"]) {
    const auto sp = join(path, "scripted");
    expect_map(scripted, sp);
    for (const auto& kv : scripted) {
      const auto name = identifier(kv.first, sp);
      p.scripted[name] = waveform(kv.second, join(sp, name), {});
    }
  }
  return p;
}

ActuatorGroup parse_group(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"id", "unit", "semantics", "capacity", "availability", "range", "idle"});
  ActuatorGroup g;
  g.id = identifier(require(node, path, "id"), join(path, "id"));
  if (auto n = node["unit"]) g.unit = text(n, join(path, "unit"));
  const auto sem = text(require(node, path, "semantics"), join(path, "semantics"));
  if (sem == "additive") {
    g.semantics = GroupSemantics::Additive;
  } else if (sem == "exclusive") {
    g.semantics = GroupSemantics::Exclusive;
  } else {
    fail(node["semantics"], join(path, "semantics"), "expected 'additive' or 'exclusive'");
  }
  // Exclusive groups count owners; their capacity is dimensionless.
  const std::string_view amount_unit =
      g.semantics == GroupSemantics::Additive ? std::string_view(g.unit) : std::string_view{};
  g.capacity = number(require(node, path, "capacity"), join(path, "capacity"), amount_unit);
  g.availability = g.capacity;
  if (auto n = node["availability"]) {
    g.availability = number(n, join(path, "availability"), amount_unit);
  }
  // Additive commands default to [0, capacity]; exclusive ones are unclamped.
  if (g.semantics == GroupSemantics::Additive) {
    g.range_lo = 0.0;
    g.range_hi = g.capacity;
  } else {
    g.range_lo = -std::numeric_limits<double>::infinity();
    g.range_hi = std::numeric_limits<double>::infinity();
  }
  if (auto n = node["range"]) {
    auto r = numbers(n, join(path, "range"), g.unit);
    if (r.size() != 2) fail(n, join(path, "range"), "expected [lo, hi]");
    g.range_lo = r[0];
    g.range_hi = r[1];
  }
  if (auto n = node["idle"]) g.idle = number(n, join(path, "idle"), g.unit);
  return g;
}

DangerMap parse_danger(const YAML::Node& node, std::string_view path) {
  return list<DangerLevel>(node, path, [](const YAML::Node& n, const std::string& p) {
    const auto s = text(n, p);
    auto d = parse_danger_level(s);
    if (!d) fail(n, p, fmt::format("unknown danger level '{}'", s));
    return *d;
  });
}

ReactionMap parse_reaction(const YAML::Node& node, std::string_view path,
                           const YAML::Node& irreversible) {
  expect_map(node, path);
  ReactionMap map;
  for (const auto& kv : node) {
    const auto name = text(kv.first, path);
    auto d = parse_danger_level(name);
    if (!d) fail(kv.first, path, fmt::format("unknown danger level '{}'", name));
    const int level = integer(kv.second, join(path, name));
    if (level < 0 || level > ReactionLevel::kMax) {
      fail(kv.second, join(path, name), "reaction level must be in [0, 4]");
    }
    map.by_danger[static_cast<std::size_t>(*d)] = ReactionLevel{level};
  }
  if (irreversible) {
    const auto ip = fmt::format("{}.irreversible", path.substr(0, path.rfind('.')));
    map.irreversible.fill(false);
    for (int level : integers(irreversible, ip)) {
      if (level < 0 || level > ReactionLevel::kMax) {
        fail(irreversible, ip, "irreversible levels must be in [0, 4]");
      }
      map.irreversible[static_cast<std::size_t>(level)] = true;
    }
  }
  return map;
}

Direction parse_direction(const YAML::Node& node, std::string_view path) {
  const auto s = text(node, path);
  if (s == "rising_is_worse") return Direction::RisingIsWorse;
  if (s == "falling_is_worse") return Direction::FallingIsWorse;
  fail(node, path, "expected 'rising_is_worse' or 'falling_is_worse'");
}

OneConfig parse_one(const YAML::Node& node, const std::string& path) {
  expect_map(node, path);
  OneConfig one;
  one.event.id = identifier(require(node, path, "id"), join(path, "id"));
  std::string kind = "base";
  if (auto n = node["kind"]) kind = text(n, join(path, "kind"));

  if (kind == "base") {
    check_keys(node, path,
               {"id", "kind", "signal", "direction", "thresholds", "hysteresis", "danger",
                "reaction", "irreversible"});
    one.event.kind = OneKind::Base;
    auto& t = one.event.table;
    t.signal = identifier(require(node, path, "signal"), join(path, "signal"));
    t.direction = parse_direction(require(node, path, "direction"), join(path, "direction"));
    const auto unit = signal_unit(t.signal);
    t.thresholds = numbers(require(node, path, "thresholds"), join(path, "thresholds"), unit);
    if (auto h = node["hysteresis"]) {
      t.hysteresis = numbers(h, join(path, "hysteresis"), unit);
    } else {
      t.hysteresis.assign(t.thresholds.size(), 0.0);
    }
  } else if (kind == "virtual") {
    check_keys(node, path,
               {"id", "kind", "inputs", "levels", "combiner", "danger", "reaction", "irreversible"});
    one.event.kind = OneKind::Virtual;
    auto& r = one.event.rule;
    r.id = one.event.id;
    r.inputs = list<std::string>(require(node, path, "inputs"), join(path, "inputs"),
                                 [](const YAML::Node& n, const std::string& p) {
                                   return identifier(n, p);
                                 });
    r.levels = integer(require(node, path, "levels"), join(path, "levels"));
    const auto combiner = require(node, path, "combiner");
    const auto cp = join(path, "combiner");
    expect_seq(combiner, cp);
    for (std::size_t i = 0; i < combiner.size(); ++i) {
      const auto rp = join(cp, i);
      check_keys(combiner[i], rp, {"when", "level"});
      auto key = integers(require(combiner[i], rp, "when"), join(rp, "when"));
      const int level = integer(require(combiner[i], rp, "level"), join(rp, "level"));
      if (!r.combiner.emplace(std::move(key), level).second) {
        fail(combiner[i], rp, "duplicate combiner row");
      }
    }
  } else if (kind == "plant_failure") {
    check_keys(node, path, {"id", "kind", "danger", "reaction", "irreversible"});
    one.event.kind = OneKind::PlantFailure;
  } else {
    fail(node["kind"], join(path, "kind"), "expected 'base', 'virtual' or 'plant_failure'");
  }

  one.danger = parse_danger(require(node, path, "danger"), join(path, "danger"));
  one.reaction =
      parse_reaction(require(node, path, "reaction"), join(path, "reaction"), node["irreversible"]);
  return one;
}

OsMapping parse_os_mapping(const YAML::Node& node, std::string_view path) {
  check_keys(node, path, {"default", "rows"});
  OsMapping m;
  m.default_scenario = identifier(require(node, path, "default"), join(path, "default"));
  if (auto rows = node["rows"]) {
    const auto rp = join(path, "rows");
    expect_seq(rows, rp);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto p = join(rp, i);
      check_keys(rows[i], p, {"reactions", "scenario"});
      auto key = integers(require(rows[i], p, "reactions"), join(p, "reactions"));
      for (int r : key) {
        if (r < 0 || r > ReactionLevel::kMax) {
          fail(rows[i]["reactions"], join(p, "reactions"), "reaction levels must be in [0, 4]");
        }
      }
      auto scenario = identifier(require(rows[i], p, "scenario"), join(p, "scenario"));
      if (!m.rows.emplace(std::move(key), std::move(scenario)).second) {
        fail(rows[i], p, "duplicate OS mapping row");
      }
    }
  }
  return m;
}

ControlTask parse_task(const YAML::Node& node, const std::string& path) {
  check_keys(node, path,
             {"id", "priority", "controller", "reference", "min_acceptable", "activation"});
  ControlTask t;
  t.id = identifier(require(node, path, "id"), join(path, "id"));
  t.priority = integer(require(node, path, "priority"), join(path, "priority"));
  t.controller = identifier(require(node, path, "controller"), join(path, "controller"));
  // Units of references and amounts follow the bound controller; they are
  // checked against it in a second pass.
  if (auto n = node["reference"]) t.reference = waveform(n, join(path, "reference"), "*");
  if (auto n = node["min_acceptable"]) t.min_acceptable = number(n, join(path, "min_acceptable"), "*");
  if (auto act = node["activation"]) {
    const auto ap = join(path, "activation");
    check_keys(act, ap, {"start", "end", "trigger"});
    if (auto n = act["start"]) t.activation.start = number(n, join(ap, "start"), "s");
    if (auto n = act["end"]) t.activation.end = number(n, join(ap, "end"), "s");
    if (auto trig = act["trigger"]) {
      const auto tp = join(ap, "trigger");
      check_keys(trig, tp, {"one", "min_level", "max_level"});
      Activation::Trigger tr;
      tr.one = identifier(require(trig, tp, "one"), join(tp, "one"));
      if (auto n = trig["min_level"]) tr.min_level = integer(n, join(tp, "min_level"));
      if (auto n = trig["max_level"]) tr.max_level = integer(n, join(tp, "max_level"));
      t.activation.trigger = tr;
    }
  }
  return t;
}

Scenario parse_scenario(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"id", "type", "tasks"});
  Scenario s;
  s.id = identifier(require(node, path, "id"), join(path, "id"));
  const auto type = text(require(node, path, "type"), join(path, "type"));
  auto parsed = parse_scenario_type(type);
  if (!parsed) fail(node["type"], join(path, "type"), fmt::format("unknown scenario type '{}'", type));
  s.type = *parsed;
  if (auto tasks = node["tasks"]) {
    s.tasks = list<ControlTask>(tasks, join(path, "tasks"), parse_task);
  }
  return s;
}

ControllerConfig parse_controller(const YAML::Node& node, const std::string& path,
                                  const std::vector<ActuatorGroup>& groups) {
  expect_map(node, path);
  ControllerConfig c;
  c.id = identifier(require(node, path, "id"), join(path, "id"));
  c.group = identifier(require(node, path, "group"), join(path, "group"));
  std::string unit;
  for (const auto& g : groups) {
    if (g.id == c.group) unit = g.unit;
  }
  const auto kind = text(require(node, path, "kind"), join(path, "kind"));

  if (kind == "feedforward") {
    check_keys(node, path, {"id", "kind", "group", "waveform"});
    c.params = FeedforwardParams{waveform(require(node, path, "waveform"), join(path, "waveform"), unit)};
  } else if (kind == "pid") {
    check_keys(node, path,
               {"id", "kind", "group", "measurement", "reference", "kp", "ki", "kd", "limits",
                "anti_windup"});
    PidParams p;
    p.measurement = identifier(require(node, path, "measurement"), join(path, "measurement"));
    if (auto n = node["reference"]) {
      p.reference = waveform(n, join(path, "reference"), signal_unit(p.measurement));
    }
    if (auto n = node["kp"]) p.kp = number(n, join(path, "kp"));
    if (auto n = node["ki"]) p.ki = number(n, join(path, "ki"));
    if (auto n = node["kd"]) p.kd = number(n, join(path, "kd"));
    auto limits = numbers(require(node, path, "limits"), join(path, "limits"), unit);
    if (limits.size() != 2) fail(node["limits"], join(path, "limits"), "expected [lo, hi]");
    p.lo = limits[0];
    p.hi = limits[1];
    if (auto n = node["anti_windup"]) p.anti_windup = boolean(n, join(path, "anti_windup"));
    c.params = p;
  } else if (kind == "da_power") {
    check_keys(node, path,
               {"id", "kind", "group", "mode", "distance_signal", "d_critical1", "gain", "p_max"});
    DaPowerParams p;
    const auto mode = text(require(node, path, "mode"), join(path, "mode"));
    if (mode == "normal") {
      p.mode = DaPowerMode::Normal;
    } else if (mode == "recovery") {
      p.mode = DaPowerMode::Recovery;
    } else {
      fail(node["mode"], join(path, "mode"), "expected 'normal' or 'recovery'");
    }
    p.distance_signal = "d_ne_edge";
    if (auto n = node["distance_signal"]) p.distance_signal = identifier(n, join(path, "distance_signal"));
    if (auto n = node["d_critical1"]) p.d_critical1 = number(n, join(path, "d_critical1"));
    if (auto n = node["gain"]) p.gain = number(n, join(path, "gain"));
    p.p_max = number(require(node, path, "p_max"), join(path, "p_max"), unit);
    c.params = p;
  } else if (kind == "da_gas") {
    check_keys(node, path, {"id", "kind", "group", "mode", "base", "factor", "ramp_down"});
    DaGasParams p;
    const auto mode = text(require(node, path, "mode"), join(path, "mode"));
    if (mode == "slow_ramp") {
      p.mode = DaGasMode::SlowRamp;
    } else if (mode == "freeze") {
      p.mode = DaGasMode::Freeze;
    } else if (mode == "cutoff") {
      p.mode = DaGasMode::Cutoff;
    } else {
      fail(node["mode"], join(path, "mode"), "expected 'slow_ramp', 'freeze' or 'cutoff'");
    }
    if (auto n = node["base"]) p.base = identifier(n, join(path, "base"));
    if (auto n = node["factor"]) p.factor = number(n, join(path, "factor"));
    if (auto n = node["ramp_down"]) p.ramp_down = number(n, join(path, "ramp_down"), "s");
    c.params = p;
  } else if (kind == "ntm") {
    check_keys(node, path, {"id", "kind", "group", "position_signal", "launcher_group",
                            "power_request"});
    NtmParams p;
    p.position_signal = identifier(require(node, path, "position_signal"), join(path, "position_signal"));
    p.launcher_group = identifier(require(node, path, "launcher_group"), join(path, "launcher_group"));
    if (auto n = node["power_request"]) p.power_request = number(n, join(path, "power_request"), unit);
    c.params = p;
  } else {
    fail(node["kind"], join(path, "kind"), fmt::format("unknown controller kind '{}'", kind));
  }
  return c;
}

// Walks `path` (dot separated) and replaces the addressed node with `value`.
void apply_override(YAML::Node& root, const Override& ov) {
  const auto& [path, value] = ov;
  std::vector<std::string> segments;
  std::stringstream ss(path);
  for (std::string seg; std::getline(ss, seg, '.');) {
    if (seg.empty()) throw ConfigError(fmt::format("--set '{}': empty path segment", path));
    segments.push_back(seg);
  }
  if (segments.empty()) throw ConfigError(fmt::format("--set '{}': empty path", path));

  YAML::Node parsed_value;
  try {
    parsed_value = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("--set '{}': bad value: {}", path, e.msg));
  }

  YAML::Node cur;
  cur.reset(root);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    const bool last = i + 1 == segments.size();
    if (cur.IsSequence()) {
      YAML::Node found;
      bool ok = false;
      for (std::size_t k = 0; k < cur.size(); ++k) {
        if (cur[k].IsMap() && cur[k]["id"] && cur[k]["id"].Scalar() == seg) {
          found.reset(cur[k]);
          ok = true;
          break;
        }
      }
      if (!ok) {
        std::size_t idx = 0;
        auto [end, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
        if (ec != std::errc{} || end != seg.data() + seg.size() || idx >= cur.size()) {
          throw ConfigError(fmt::format("--set '{}': no list element '{}'", path, seg));
        }
        if (last) {
          cur[idx] = parsed_value;
          return;
        }
        found.reset(cur[idx]);
      } else if (last) {
        throw ConfigError(fmt::format("--set '{}': cannot replace a whole list element", path));
      }
      cur.reset(found);
    } else if (cur.IsMap() || cur.IsNull()) {
      if (last) {
        cur[seg] = parsed_value;
        return;
      }
      YAML::Node next = cur[seg];
      if (!next) throw ConfigError(fmt::format("--set '{}': no key '{}'", path, seg));
      cur.reset(next);
    } else {
      throw ConfigError(fmt::format("--set '{}': '{}' is a scalar", path, seg));
    }
  }
}

// Re-reads task reference/min_acceptable units against the bound controller.
void check_task_units(const YAML::Node& scenarios, const PulseSchedule& ps) {
  for (std::size_t si = 0; si < ps.scenarios.size(); ++si) {
    const auto& sc = ps.scenarios[si];
    const auto tasks = scenarios[si]["tasks"];
    for (std::size_t ti = 0; ti < sc.tasks.size(); ++ti) {
      const auto& task = sc.tasks[ti];
      const auto path = fmt::format("scenarios[{}].tasks[{}]", si, ti);
      const auto* ctrl = ps.controller(task.controller);
      if (ctrl == nullptr) continue;
      std::string_view ref_unit;
      if (const auto* pid = std::get_if<PidParams>(&ctrl->params)) {
        ref_unit = signal_unit(pid->measurement);
      } else if (const auto* g = ps.group(ctrl->group)) {
        ref_unit = g->unit;
      }
      const auto* g = ps.group(ctrl->group);
      const std::string_view amount_unit =
          g != nullptr && g->semantics == GroupSemantics::Additive ? std::string_view(g->unit)
                                                                   : std::string_view{};
      if (auto n = tasks[ti]["reference"]) (void)waveform(n, join(path, "reference"), ref_unit);
      if (auto n = tasks[ti]["min_acceptable"]) (void)number(n, join(path, "min_acceptable"), amount_unit);
    }
  }
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

std::string num(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

void emit_pairs(YAML::Emitter& e, const std::vector<std::pair<double, double>>& pts) {
  e << YAML::BeginSeq;
  for (const auto& [x, y] : pts) e << YAML::Flow << YAML::BeginSeq << num(x) << num(y) << YAML::EndSeq;
  e << YAML::EndSeq;
}

void emit_waveform(YAML::Emitter& e, const Waveform& wf) {
  e << YAML::BeginMap;
  e << YAML::Key << "interpolation" << YAML::Value
    << (wf.interpolation == Interpolation::Hold ? "hold" : "linear");
  e << YAML::Key << "points" << YAML::Value;
  emit_pairs(e, wf.points);
  e << YAML::EndMap;
}

template <typename T>
void emit_ints(YAML::Emitter& e, const std::vector<T>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (const auto& x : v) e << x;
  e << YAML::EndSeq;
}

void emit_one(YAML::Emitter& e, const OneConfig& one) {
  e << YAML::BeginMap;
  e << YAML::Key << "id" << YAML::Value << one.event.id;
  switch (one.event.kind) {
    case OneKind::Base: {
      const auto& t = one.event.table;
      e << YAML::Key << "kind" << YAML::Value << "base";
      e << YAML::Key << "signal" << YAML::Value << t.signal;
      e << YAML::Key << "direction" << YAML::Value
        << (t.direction == Direction::RisingIsWorse ? "rising_is_worse" : "falling_is_worse");
      e << YAML::Key << "thresholds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double x : t.thresholds) e << num(x);
      e << YAML::EndSeq;
      e << YAML::Key << "hysteresis" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double x : t.hysteresis) e << num(x);
      e << YAML::EndSeq;
      break;
    }
    case OneKind::Virtual: {
      const auto& r = one.event.rule;
      e << YAML::Key << "kind" << YAML::Value << "virtual";
      e << YAML::Key << "inputs" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& in : r.inputs) e << in;
      e << YAML::EndSeq;
      e << YAML::Key << "levels" << YAML::Value << r.levels;
      e << YAML::Key << "combiner" << YAML::Value << YAML::BeginSeq;
      for (const auto& [key, level] : r.combiner) {
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "when" << YAML::Value;
        emit_ints(e, key);
        e << YAML::Key << "level" << YAML::Value << level << YAML::EndMap;
      }
      e << YAML::EndSeq;
      break;
    }
    case OneKind::PlantFailure:
      e << YAML::Key << "kind" << YAML::Value << "plant_failure";
      break;
  }
  e << YAML::Key << "danger" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto d : one.danger) e << std::string(to_string(d));
  e << YAML::EndSeq;
  e << YAML::Key << "reaction" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (auto d : kAllDangerLevels) {
    if (const auto& r = one.reaction.by_danger[static_cast<std::size_t>(d)]) {
      e << YAML::Key << std::string(to_string(d)) << YAML::Value << r->value();
    }
  }
  e << YAML::EndMap;
  e << YAML::Key << "irreversible" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i <= ReactionLevel::kMax; ++i) {
    if (one.reaction.irreversible[static_cast<std::size_t>(i)]) e << i;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;
}

void emit_task(YAML::Emitter& e, const ControlTask& t) {
  e << YAML::BeginMap;
  e << YAML::Key << "id" << YAML::Value << t.id;
  e << YAML::Key << "priority" << YAML::Value << t.priority;
  e << YAML::Key << "controller" << YAML::Value << t.controller;
  if (t.reference) {
    e << YAML::Key << "reference" << YAML::Value;
    emit_waveform(e, *t.reference);
  }
  e << YAML::Key << "min_acceptable" << YAML::Value << num(t.min_acceptable);
  const auto& a = t.activation;
  if (a.start || a.end || a.trigger) {
    e << YAML::Key << "activation" << YAML::Value << YAML::BeginMap;
    if (a.start) e << YAML::Key << "start" << YAML::Value << num(*a.start);
    if (a.end) e << YAML::Key << "end" << YAML::Value << num(*a.end);
    if (a.trigger) {
      e << YAML::Key << "trigger" << YAML::Value << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "one" << YAML::Value << a.trigger->one;
      e << YAML::Key << "min_level" << YAML::Value << a.trigger->min_level;
      if (a.trigger->max_level) e << YAML::Key << "max_level" << YAML::Value << *a.trigger->max_level;
      e << YAML::EndMap;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
}

void emit_controller(YAML::Emitter& e, const ControllerConfig& c) {
  e << YAML::BeginMap;
  e << YAML::Key << "id" << YAML::Value << c.id;
  e << YAML::Key << "kind" << YAML::Value << std::string(kind_name(c.params));
  e << YAML::Key << "group" << YAML::Value << c.group;
  struct Visitor {
    YAML::Emitter& e;
    void operator()(const FeedforwardParams& p) const {
      e << YAML::Key << "waveform" << YAML::Value;
      emit_waveform(e, p.waveform);
    }
    void operator()(const PidParams& p) const {
      e << YAML::Key << "measurement" << YAML::Value << p.measurement;
      if (p.reference) {
        e << YAML::Key << "reference" << YAML::Value;
        emit_waveform(e, *p.reference);
      }
      e << YAML::Key << "kp" << YAML::Value << num(p.kp);
      e << YAML::Key << "ki" << YAML::Value << num(p.ki);
      e << YAML::Key << "kd" << YAML::Value << num(p.kd);
      e << YAML::Key << "limits" << YAML::Value << YAML::Flow << YAML::BeginSeq << num(p.lo)
        << num(p.hi) << YAML::EndSeq;
      e << YAML::Key << "anti_windup" << YAML::Value << (p.anti_windup ? "true" : "false");
    }
    void operator()(const DaPowerParams& p) const {
      e << YAML::Key << "mode" << YAML::Value
        << (p.mode == DaPowerMode::Normal ? "normal" : "recovery");
      e << YAML::Key << "distance_signal" << YAML::Value << p.distance_signal;
      e << YAML::Key << "d_critical1" << YAML::Value << num(p.d_critical1);
      e << YAML::Key << "gain" << YAML::Value << num(p.gain);
      e << YAML::Key << "p_max" << YAML::Value << num(p.p_max);
    }
    void operator()(const DaGasParams& p) const {
      const char* mode = p.mode == DaGasMode::SlowRamp ? "slow_ramp"
                         : p.mode == DaGasMode::Freeze ? "freeze"
                                                       : "cutoff";
      e << YAML::Key << "mode" << YAML::Value << mode;
      if (!p.base.empty()) e << YAML::Key << "base" << YAML::Value << p.base;
      e << YAML::Key << "factor" << YAML::Value << num(p.factor);
      e << YAML::Key << "ramp_down" << YAML::Value << num(p.ramp_down);
    }
    void operator()(const NtmParams& p) const {
      e << YAML::Key << "position_signal" << YAML::Value << p.position_signal;
      e << YAML::Key << "launcher_group" << YAML::Value << p.launcher_group;
      if (p.power_request) e << YAML::Key << "power_request" << YAML::Value << num(*p.power_request);
    }
  };
  std::visit(Visitor{e}, c.params);
  e << YAML::EndMap;
}

}  // namespace

// ---------------------------------------------------------------------------
// PulseSchedule
// ---------------------------------------------------------------------------

std::vector<MonitoredOne> PulseSchedule::monitored() const {
  std::vector<MonitoredOne> out;
  out.reserve(ones.size());
  for (const auto& o : ones) out.push_back(o.event);
  return out;
}

SupervisorConfig PulseSchedule::supervisor_config() const {
  SupervisorConfig cfg;
  for (const auto& o : ones) cfg.ones.push_back({o.event.id, o.danger, o.reaction});
  cfg.os_mapping = os_mapping;
  cfg.scenarios = scenarios;
  return cfg;
}

namespace {
template <typename T>
const T* find_by_id(const std::vector<T>& v, std::string_view id) {
  auto it = std::find_if(v.begin(), v.end(), [&](const T& x) { return x.id == id; });
  return it == v.end() ? nullptr : &*it;
}
}  // namespace

const ControllerConfig* PulseSchedule::controller(std::string_view id) const {
  return find_by_id(controllers, id);
}
const ActuatorGroup* PulseSchedule::group(std::string_view id) const {
  return find_by_id(actuator_groups, id);
}
const Scenario* PulseSchedule::scenario(std::string_view id) const {
  return find_by_id(scenarios, id);
}
const OneConfig* PulseSchedule::one(std::string_view id) const {
  auto it = std::find_if(ones.begin(), ones.end(), [&](const OneConfig& o) { return o.id() == id; });
  return it == ones.end() ? nullptr : &*it;
}

std::span<const std::string_view> plant_signal_names() { return kPlantSignals; }

PulseSchedule parse(std::string_view document, const std::vector<Override>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("syntax error: {} (line {}, column {})", e.msg, e.mark.line + 1,
                                  e.mark.column + 1));
  }
  for (const auto& ov : overrides) apply_override(root, ov);

  if (!root || root.IsNull()) {
    throw ConfigError(
        "empty document: missing required sections ones, os_mapping, scenarios, controllers, "
        "actuator_groups, plant, run");
  }
  check_keys(root, "", {"ones", "os_mapping", "scenarios", "controllers", "actuator_groups",
                        "plant", "run"});

  PulseSchedule ps;
  ps.run = parse_run(require(root, "", "run"), "run");
  ps.plant = parse_plant(require(root, "", "plant"), "plant");
  ps.actuator_groups =
      list<ActuatorGroup>(require(root, "", "actuator_groups"), "actuator_groups", parse_group);
  // `ones: []` is a legal (empty) monitor configuration.
  if (!root["ones"]) fail(root, "", "missing required key 'ones'");
  if (!root["ones"].IsNull()) ps.ones = list<OneConfig>(root["ones"], "ones", parse_one);
  ps.os_mapping = parse_os_mapping(require(root, "", "os_mapping"), "os_mapping");
  ps.scenarios = list<Scenario>(require(root, "", "scenarios"), "scenarios", parse_scenario);
  ps.controllers = list<ControllerConfig>(
      require(root, "", "controllers"), "controllers",
      [&](const YAML::Node& n, const std::string& p) {
        return parse_controller(n, p, ps.actuator_groups);
      });
  check_task_units(root["scenarios"], ps);
  return ps;
}

PulseSchedule load_schedule(const std::filesystem::path& path,
                            const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open schedule '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string serialize(const PulseSchedule& ps) {
  YAML::Emitter e;
  e << YAML::BeginMap;

  e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << num(ps.run.dt);
  e << YAML::Key << "duration" << YAML::Value << num(ps.run.duration);
  e << YAML::Key << "post_roll" << YAML::Value << num(ps.run.post_roll);
  e << YAML::EndMap;

  const auto& p = ps.plant;
  e << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tau_E" << YAML::Value << num(p.tau_E);
  e << YAML::Key << "tau_98" << YAML::Value << num(p.tau_98);
  e << YAML::Key << "tau_n" << YAML::Value << num(p.tau_n);
  e << YAML::Key << "k_gas" << YAML::Value << num(p.k_gas);
  e << YAML::Key << "P_ohmic" << YAML::Value << num(p.P_ohmic);
  e << YAML::Key << "nbi_energy_limit" << YAML::Value << num(p.nbi_energy_limit);
  e << YAML::Key << "initial" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "W" << YAML::Value << num(p.initial_W);
  e << YAML::Key << "ne_edge_norm" << YAML::Value << num(p.initial_ne_edge_norm);
  e << YAML::EndMap;
  e << YAML::Key << "degradation" << YAML::Value;
  emit_pairs(e, p.degradation);
  e << YAML::Key << "boundary" << YAML::Value;
  emit_pairs(e, p.boundary.vertices);
  e << YAML::Key << "inputs" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "nbi_power" << YAML::Value << p.nbi_group;
  e << YAML::Key << "gas_flux" << YAML::Value << p.gas_group;
  e << YAML::EndMap;
  if (!p.scripted.empty()) {
    e << YAML::Key << "scripted" << YAML::Value << YAML::BeginMap;
    for (const auto& [name, wf] : p.scripted) {
      e << YAML::Key << name << YAML::Value;
      emit_waveform(e, wf);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "actuator_groups" << YAML::Value << YAML::BeginSeq;
  for (const auto& g : ps.actuator_groups) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << g.id;
    e << YAML::Key << "unit" << YAML::Value << g.unit;
    e << YAML::Key << "semantics" << YAML::Value
      << (g.semantics == GroupSemantics::Additive ? "additive" : "exclusive");
    e << YAML::Key << "capacity" << YAML::Value << num(g.capacity);
    e << YAML::Key << "availability" << YAML::Value << num(g.availability);
    if (std::isfinite(g.range_lo) || std::isfinite(g.range_hi)) {
      e << YAML::Key << "range" << YAML::Value << YAML::Flow << YAML::BeginSeq << num(g.range_lo)
        << num(g.range_hi) << YAML::EndSeq;
    }
    e << YAML::Key << "idle" << YAML::Value << num(g.idle);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "ones" << YAML::Value << YAML::BeginSeq;
  for (const auto& one : ps.ones) emit_one(e, one);
  e << YAML::EndSeq;

  e << YAML::Key << "os_mapping" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "default" << YAML::Value << ps.os_mapping.default_scenario;
  e << YAML::Key << "rows" << YAML::Value << YAML::BeginSeq;
  for (const auto& [key, scenario] : ps.os_mapping.rows) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "reactions" << YAML::Value;
    emit_ints(e, key);
    e << YAML::Key << "scenario" << YAML::Value << scenario << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;

  e << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : ps.scenarios) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << s.id;
    e << YAML::Key << "type" << YAML::Value << std::string(to_string(s.type));
    e << YAML::Key << "tasks" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : s.tasks) emit_task(e, t);
    e << YAML::EndSeq;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "controllers" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : ps.controllers) emit_controller(e, c);
  e << YAML::EndSeq;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace pcs
