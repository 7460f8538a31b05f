// Static checks on a parsed pulse schedule. A schedule with no errors here
// cannot raise ConfigError while running.

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pcs/config.hpp"

namespace pcs {

namespace {

class Checker {
 public:
  explicit Checker(const PulseSchedule& ps) : ps_(ps) {
    for (auto name : plant_signal_names()) signals_.insert(std::string(name));
    for (const auto& [name, wf] : ps.plant.scripted) signals_.insert(name);
  }

  std::vector<Diagnostic> run() {
    check_run();
    check_plant();
    check_groups();
    check_ones();
    check_controllers();
    check_scenarios();
    check_os_mapping();
    return std::move(out_);
  }

 private:
  void error(std::string path, std::string message) {
    out_.push_back({Diagnostic::Severity::Error, std::move(path), std::move(message)});
  }
  void warning(std::string path, std::string message) {
    out_.push_back({Diagnostic::Severity::Warning, std::move(path), std::move(message)});
  }

  bool known_signal(const std::string& name) const { return signals_.count(name) > 0; }

  void check_waveform(const Waveform& wf, const std::string& path) {
    if (wf.points.empty()) {
      error(path, "empty waveform");
      return;
    }
    for (std::size_t i = 1; i < wf.points.size(); ++i) {
      if (!(wf.points[i].first > wf.points[i - 1].first)) {
        error(path, "waveform times must be strictly increasing");
        return;
      }
    }
  }

  template <typename T>
  void check_unique_ids(const std::vector<T>& items, std::string_view section,
                        auto&& id_of) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::string& id = id_of(items[i]);
      if (!seen.insert(id).second) error(fmt::format("{}[{}]", section, i), fmt::format("duplicate id '{}'", id));
    }
  }

  void check_run() {
    if (!(ps_.run.dt > 0.0)) error("run.dt", "must be positive");
    if (ps_.run.duration < 0.0) error("run.duration", "must be non-negative");
    if (ps_.run.post_roll < 0.0) error("run.post_roll", "must be non-negative");
  }

  void check_plant() {
    const auto& p = ps_.plant;
    if (!(p.tau_E > 0.0)) error("plant.tau_E", "must be positive");
    if (!(p.tau_98 > 0.0)) error("plant.tau_98", "must be positive");
    if (!(p.tau_n > 0.0)) error("plant.tau_n", "must be positive");
    if (p.k_gas < 0.0) error("plant.k_gas", "must be non-negative");
    if (p.P_ohmic < 0.0) error("plant.P_ohmic", "must be non-negative");
    if (!(p.nbi_energy_limit > 0.0)) error("plant.nbi_energy_limit", "must be positive");

    if (p.degradation.empty()) error("plant.degradation", "needs at least one point");
    for (std::size_t i = 0; i < p.degradation.size(); ++i) {
      if (p.degradation[i].second < 0.0) {
        error(fmt::format("plant.degradation[{}]", i), "factor must be non-negative");
      }
      if (i > 0 && !(p.degradation[i].first > p.degradation[i - 1].first)) {
        error(fmt::format("plant.degradation[{}]", i), "densities must be strictly increasing");
      }
      if (i > 0 && p.degradation[i].second > p.degradation[i - 1].second) {
        error(fmt::format("plant.degradation[{}]", i), "degradation factor must not increase with density");
      }
    }

    const auto& v = p.boundary.vertices;
    if (v.size() < 2) error("plant.boundary", "needs at least two vertices");
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i].first > v[i - 1].first)) {
        error(fmt::format("plant.boundary[{}]", i), "vertices must be strictly increasing in ne_edge_norm");
      }
    }

    if (ps_.group(p.nbi_group) == nullptr) {
      error("plant.inputs.nbi_power", fmt::format("unknown actuator group '{}'", p.nbi_group));
    }
    if (ps_.group(p.gas_group) == nullptr) {
      error("plant.inputs.gas_flux", fmt::format("unknown actuator group '{}'", p.gas_group));
    }
    for (const auto& [name, wf] : p.scripted) {
      const auto path = fmt::format("plant.scripted.{}", name);
      auto builtin = plant_signal_names();
      if (std::find(builtin.begin(), builtin.end(), name) != builtin.end()) {
        error(path, "scripted signal shadows a plant signal");
      }
      check_waveform(wf, path);
    }
  }

  void check_groups() {
    check_unique_ids(ps_.actuator_groups, "actuator_groups",
                     [](const ActuatorGroup& g) -> const std::string& { return g.id; });
    for (std::size_t i = 0; i < ps_.actuator_groups.size(); ++i) {
      const auto& g = ps_.actuator_groups[i];
      const auto path = fmt::format("actuator_groups[{}]", i);
      if (g.capacity < 0.0) error(path, "capacity must be non-negative");
      if (g.availability < 0.0 || g.availability > g.capacity) {
        error(path, "availability must lie in [0, capacity]");
      }
      if (g.range_lo > g.range_hi) error(path, "command range must have lo <= hi");
      if (g.semantics == GroupSemantics::Exclusive && g.capacity < 1.0) {
        error(path, "exclusive groups need capacity >= 1 (one owner)");
      }
    }
  }

  void check_reaction(const OneConfig& one, const std::string& path) {
    std::vector<std::string> missing;
    for (auto d : kAllDangerLevels) {
      if (!one.reaction.by_danger[static_cast<std::size_t>(d)]) missing.emplace_back(to_string(d));
    }
    if (!missing.empty()) {
      error(path + ".reaction", fmt::format("non-total mapping: no reaction for {}", fmt::join(missing, ", ")));
    }
    if (!one.reaction.irreversible[3] || !one.reaction.irreversible[4]) {
      warning(path + ".irreversible", "irreversible set excludes level 3 and/or 4");
    }
  }

  void check_thresholds(const ThresholdTable& t, const std::string& path) {
    if (!known_signal(t.signal)) error(path + ".signal", fmt::format("unknown signal '{}'", t.signal));
    if (t.thresholds.empty()) error(path + ".thresholds", "needs at least one threshold");
    if (t.hysteresis.size() != t.thresholds.size()) {
      error(path + ".hysteresis", "needs one band per threshold");
      return;
    }
    const bool rising = t.direction == Direction::RisingIsWorse;
    for (std::size_t i = 0; i < t.thresholds.size(); ++i) {
      if (t.hysteresis[i] < 0.0) error(path + ".hysteresis", "bands must be non-negative");
      if (i == 0) continue;
      const double a = t.thresholds[i - 1];
      const double b = t.thresholds[i];
      if (rising ? !(b > a) : !(b < a)) {
        error(path + ".thresholds",
              fmt::format("thresholds must be strictly {} for {}", rising ? "increasing" : "decreasing",
                          rising ? "rising_is_worse" : "falling_is_worse"));
        continue;
      }
      const double ha = t.hysteresis[i - 1];
      const double hb = t.hysteresis[i];
      const bool separated = rising ? a + ha < b - hb : a - ha > b + hb;
      if (!separated) {
        error(path + ".hysteresis",
              fmt::format("hysteresis overlap between thresholds {} and {}", i, i + 1));
      }
    }
  }

  void check_virtual(const OneConfig& one, const std::string& path) {
    const auto& r = one.event.rule;
    if (r.inputs.empty()) {
      error(path + ".inputs", "needs at least one input");
      return;
    }
    if (r.levels < 1) error(path + ".levels", "must be at least 1");
    std::vector<int> ranges;
    for (const auto& in : r.inputs) {
      const auto* src = ps_.one(in);
      if (src == nullptr) {
        error(path + ".inputs", fmt::format("unknown input ONE '{}'", in));
        return;
      }
      if (src->event.kind == OneKind::Virtual) {
        error(path + ".inputs", fmt::format("input '{}' is itself virtual", in));
        return;
      }
      ranges.push_back(src->event.levels());
    }
    for (const auto& [key, level] : r.combiner) {
      bool in_domain = key.size() == ranges.size();
      for (std::size_t k = 0; in_domain && k < key.size(); ++k) {
        in_domain = key[k] >= 0 && key[k] <= ranges[k];
      }
      if (!in_domain) {
        error(path + ".combiner", fmt::format("row ({}) outside the input level domain", fmt::join(key, ",")));
      }
      if (level < 0 || level > r.levels) {
        error(path + ".combiner", fmt::format("row ({}) output {} outside [0, {}]", fmt::join(key, ","), level, r.levels));
      }
    }
    // Totality over the product of input ranges.
    std::vector<int> key(ranges.size(), 0);
    std::size_t missing = 0;
    std::string first_missing;
    while (true) {
      if (r.combiner.count(key) == 0) {
        if (missing++ == 0) first_missing = fmt::format("({})", fmt::join(key, ","));
      }
      std::size_t k = 0;
      while (k < key.size() && ++key[k] > ranges[k]) key[k++] = 0;
      if (k == key.size()) break;
    }
    if (missing > 0) {
      error(path + ".combiner",
            fmt::format("missing combiner entries: {} input tuple(s) unmapped, first {}", missing, first_missing));
    }
  }

  void check_ones() {
    check_unique_ids(ps_.ones, "ones", [](const OneConfig& o) -> const std::string& { return o.id(); });
    for (std::size_t i = 0; i < ps_.ones.size(); ++i) {
      const auto& one = ps_.ones[i];
      const auto path = fmt::format("ones[{}]", i);
      switch (one.event.kind) {
        case OneKind::Base:
          check_thresholds(one.event.table, path);
          break;
        case OneKind::Virtual:
          check_virtual(one, path);
          break;
        case OneKind::PlantFailure:
          break;
      }
      const auto expected = static_cast<std::size_t>(std::max(0, one.event.levels())) + 1;
      if (one.danger.size() != expected) {
        error(path + ".danger",
              fmt::format("non-total mapping: {} event levels need {} danger entries, got {}",
                          expected, expected, one.danger.size()));
      }
      check_reaction(one, path);
    }
  }

  void check_controllers() {
    check_unique_ids(ps_.controllers, "controllers",
                     [](const ControllerConfig& c) -> const std::string& { return c.id; });
    for (std::size_t i = 0; i < ps_.controllers.size(); ++i) {
      const auto& c = ps_.controllers[i];
      const auto path = fmt::format("controllers[{}]", i);
      const auto* group = ps_.group(c.group);
      if (group == nullptr) error(path + ".group", fmt::format("unknown actuator group '{}'", c.group));

      if (const auto* ff = std::get_if<FeedforwardParams>(&c.params)) {
        check_waveform(ff->waveform, path + ".waveform");
      } else if (const auto* pid = std::get_if<PidParams>(&c.params)) {
        if (!known_signal(pid->measurement)) {
          error(path + ".measurement", fmt::format("unknown signal '{}'", pid->measurement));
        }
        if (pid->lo > pid->hi) error(path + ".limits", "lo must not exceed hi");
        if (pid->ki < 0.0) error(path + ".ki", "must be non-negative");
        if (pid->reference) check_waveform(*pid->reference, path + ".reference");
      } else if (const auto* dp = std::get_if<DaPowerParams>(&c.params)) {
        if (!(dp->p_max > 0.0)) error(path + ".p_max", "must be positive");
        if (dp->gain < 0.0) error(path + ".gain", "must be non-negative");
        if (!known_signal(dp->distance_signal)) {
          error(path + ".distance_signal", fmt::format("unknown signal '{}'", dp->distance_signal));
        }
      } else if (const auto* dg = std::get_if<DaGasParams>(&c.params)) {
        if (dg->factor < 0.0 || dg->factor > 1.0) error(path + ".factor", "must lie in [0, 1]");
        if (dg->ramp_down < 0.0) error(path + ".ramp_down", "must be non-negative");
        if (dg->mode == DaGasMode::SlowRamp && dg->base.empty()) {
          error(path + ".base", "slow_ramp needs a base feedforward controller");
        }
        if (!dg->base.empty()) {
          const auto* base = ps_.controller(dg->base);
          if (base == nullptr || !std::holds_alternative<FeedforwardParams>(base->params)) {
            error(path + ".base", fmt::format("'{}' is not a feedforward controller", dg->base));
          }
        }
      } else if (const auto* ntm = std::get_if<NtmParams>(&c.params)) {
        if (!known_signal(ntm->position_signal)) {
          error(path + ".position_signal", fmt::format("unknown signal '{}'", ntm->position_signal));
        }
        const auto* launcher = ps_.group(ntm->launcher_group);
        if (launcher == nullptr) {
          error(path + ".launcher_group", fmt::format("unknown actuator group '{}'", ntm->launcher_group));
        } else if (launcher->semantics != GroupSemantics::Exclusive) {
          error(path + ".launcher_group", "launcher group must be exclusive");
        }
        if (ntm->launcher_group == c.group) error(path + ".launcher_group", "must differ from the power group");
        if (group != nullptr && group->semantics != GroupSemantics::Additive) {
          error(path + ".group", "NTM power group must be additive");
        }
        if (ntm->power_request && *ntm->power_request < 0.0) {
          error(path + ".power_request", "must be non-negative");
        }
      }
    }
  }

  void check_scenarios() {
    check_unique_ids(ps_.scenarios, "scenarios", [](const Scenario& s) -> const std::string& { return s.id; });
    for (std::size_t si = 0; si < ps_.scenarios.size(); ++si) {
      const auto& sc = ps_.scenarios[si];
      const auto spath = fmt::format("scenarios[{}]", si);
      std::set<std::string> ids;
      std::set<int> priorities;
      std::set<std::string> controllers;
      for (std::size_t ti = 0; ti < sc.tasks.size(); ++ti) {
        const auto& t = sc.tasks[ti];
        const auto path = fmt::format("{}.tasks[{}]", spath, ti);
        if (!ids.insert(t.id).second) error(path, fmt::format("duplicate task id '{}' in scenario", t.id));
        if (t.priority < 1) error(path + ".priority", "must be a positive integer");
        if (!priorities.insert(t.priority).second) {
          error(path + ".priority", fmt::format("duplicate task priority {} in scenario '{}'", t.priority, sc.id));
        }
        const auto* ctrl = ps_.controller(t.controller);
        if (ctrl == nullptr) {
          error(path + ".controller", fmt::format("task binds unknown controller '{}'", t.controller));
        } else {
          if (!controllers.insert(t.controller).second) {
            error(path + ".controller", fmt::format("controller '{}' bound twice in scenario", t.controller));
          }
          if (ps_.group(ctrl->group) == nullptr) {
            error(path + ".controller",
                  fmt::format("task binds unknown actuator group '{}' through '{}'", ctrl->group, ctrl->id));
          }
          if (const auto* pid = std::get_if<PidParams>(&ctrl->params)) {
            if (!pid->reference && !t.reference) error(path + ".reference", "PID task needs a reference");
          }
        }
        if (t.reference) check_waveform(*t.reference, path + ".reference");
        if (t.min_acceptable < 0.0) error(path + ".min_acceptable", "must be non-negative");
        const auto& a = t.activation;
        if (a.start && a.end && !(*a.start < *a.end)) error(path + ".activation", "start must precede end");
        if (a.trigger) {
          const auto* one = ps_.one(a.trigger->one);
          if (one == nullptr) {
            error(path + ".activation.trigger", fmt::format("unknown ONE '{}'", a.trigger->one));
          } else {
            const int levels = one->event.levels();
            if (a.trigger->min_level < 0 || a.trigger->min_level > levels) {
              error(path + ".activation.trigger", fmt::format("min_level outside [0, {}]", levels));
            }
            if (a.trigger->max_level && *a.trigger->max_level < a.trigger->min_level) {
              error(path + ".activation.trigger", "max_level below min_level");
            }
          }
        }
      }
    }
  }

  // Reaction levels reachable for one ONE: image of its event levels
  // through the danger and reaction maps.
  std::vector<int> reachable_reactions(const OneConfig& one) const {
    std::set<int> out{0};  // initial state
    for (auto d : one.danger) {
      if (const auto& r = one.reaction.by_danger[static_cast<std::size_t>(d)]) out.insert(r->value());
    }
    return {out.begin(), out.end()};
  }

  void check_os_mapping() {
    const auto& m = ps_.os_mapping;
    const auto* def = ps_.scenario(m.default_scenario);
    if (def == nullptr) {
      error("os_mapping.default", fmt::format("unknown scenario '{}'", m.default_scenario));
    } else if (def->type != ScenarioType::Normal) {
      error("os_mapping.default", "default scenario must be of type normal");
    }
    for (const auto& [key, scenario] : m.rows) {
      const auto path = fmt::format("os_mapping.rows({})", fmt::join(key, ","));
      if (key.size() != ps_.ones.size()) {
        error(path, fmt::format("tuple has {} entries, schedule has {} ONEs", key.size(), ps_.ones.size()));
      }
      const auto* sc = ps_.scenario(scenario);
      if (sc == nullptr) {
        error(path, fmt::format("row references unknown scenario '{}'", scenario));
      } else if (std::all_of(key.begin(), key.end(), [](int r) { return r == 0; }) &&
                 sc->type != ScenarioType::Normal) {
        error(path, "the all-zero tuple must map to a normal scenario");
      }
    }

    // Reachable tuples that only the severity fallback resolves.
    std::vector<std::vector<int>> reach;
    std::size_t total = 1;
    for (const auto& one : ps_.ones) {
      reach.push_back(reachable_reactions(one));
      total *= reach.back().size();
      if (total > 200000) {
        warning("os_mapping", "reachable reaction-tuple space too large to enumerate");
        return;
      }
    }
    std::vector<std::size_t> idx(reach.size(), 0);
    std::vector<std::string> uncovered;
    std::size_t count = 0;
    while (true) {
      std::vector<int> key;
      key.reserve(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) key.push_back(reach[k][idx[k]]);
      if (m.rows.count(key) == 0) {
        ++count;
        if (uncovered.size() < 6) uncovered.push_back(fmt::format("({})", fmt::join(key, ",")));
      }
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == reach[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
    if (count > 0) {
      warning("os_mapping.rows",
              fmt::format("{} reachable reaction tuple(s) have no row and rely on the severity "
                          "fallback (highest reaction level selects the scenario type): {}{}",
                          count, fmt::join(uncovered, " "), count > uncovered.size() ? " ..." : ""));
    }
  }

  const PulseSchedule& ps_;
  std::set<std::string> signals_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::string Diagnostic::to_string() const {
  return fmt::format("{}: {}: {}", severity == Severity::Error ? "error" : "warning", path, message);
}

std::vector<Diagnostic> validate(const PulseSchedule& schedule) { return Checker(schedule).run(); }

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; });
}

}  // namespace pcs
