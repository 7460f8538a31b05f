#include "pcs/plant_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace pcs {

namespace {

double interpolate(const std::vector<std::pair<double, double>>& table, double x) {
  if (table.empty()) return 1.0;
  if (x <= table.front().first) return table.front().second;
  if (x >= table.back().first) return table.back().second;
  auto hi = std::upper_bound(table.begin(), table.end(), x,
                             [](double v, const auto& p) { return v < p.first; });
  auto lo = std::prev(hi);
  return lo->second + (x - lo->first) / (hi->first - lo->first) * (hi->second - lo->second);
}

struct Vec2 {
  double x;
  double y;
};

// Squared distance from p to the segment a + t(b - a), t in [0, t_max].
double dist2_to_segment(Vec2 p, Vec2 a, Vec2 b, double t_max) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, t_max);
  const double ex = p.x - (a.x + t * dx);
  const double ey = p.y - (a.y + t * dy);
  return ex * ex + ey * ey;
}

}  // namespace

double DisruptionBoundary::height(double ne) const {
  const auto& v = vertices;
  if (v.size() < 2) throw ConfigError("disruption boundary needs at least two vertices");
  std::size_t seg = 0;
  if (ne >= v.back().first) {
    seg = v.size() - 2;
  } else if (ne > v.front().first) {
    auto hi = std::upper_bound(v.begin(), v.end(), ne,
                               [](double x, const auto& p) { return x < p.first; });
    seg = static_cast<std::size_t>(std::distance(v.begin(), hi)) - 1;
  }
  const auto& [x0, y0] = v[seg];
  const auto& [x1, y1] = v[seg + 1];
  return y0 + (ne - x0) * (y1 - y0) / (x1 - x0);
}

double degradation_factor(const PlantParams& params, double ne_edge_norm) {
  return interpolate(params.degradation, ne_edge_norm);
}

PlantState initial_plant_state(const PlantParams& params) {
  PlantState s;
  s.W = params.initial_W;
  s.ne_edge_norm = params.initial_ne_edge_norm;
  s.H98y2 = params.tau_E / params.tau_98 * degradation_factor(params, s.ne_edge_norm);
  s.disrupted = distance(s.H98y2, s.ne_edge_norm, params.boundary) < 0.0;
  return s;
}

PlantState plant_step(const PlantCommands& commands, const PlantState& state, double dt,
                      const PlantParams& params) {
  if (!std::isfinite(commands.nbi_power) || !std::isfinite(commands.gas_flux)) {
    throw SimFault(fmt::format("non-finite plant command (nbi {}, gas {})", commands.nbi_power,
                               commands.gas_flux));
  }
  if (!(dt > 0.0)) throw SimFault("plant_step: dt must be positive");

  PlantState next = state;
  next.time = state.time + dt;
  if (state.disrupted) return next;

  const double power = std::max(0.0, commands.nbi_power);
  const double flux = std::max(0.0, commands.gas_flux);

  const double ne_target = params.k_gas * flux;
  next.ne_edge_norm =
      ne_target + (state.ne_edge_norm - ne_target) * std::exp(-dt / params.tau_n);

  const double degradation = degradation_factor(params, next.ne_edge_norm);
  const double tau_eff = params.tau_E * degradation;
  if (tau_eff > 0.0) {
    const double w_target = tau_eff * (power + params.P_ohmic);
    next.W = w_target + (state.W - w_target) * std::exp(-dt / tau_eff);
  } else {
    next.W = 0.0;
  }
  next.H98y2 = params.tau_E / params.tau_98 * degradation;
  next.nbi_power = power;
  next.gas_flux = flux;
  next.nbi_energy = state.nbi_energy + dt * power;
  next.disrupted = distance(next.H98y2, next.ne_edge_norm, params.boundary) < 0.0;
  return next;
}

double distance(double H98y2, double ne_edge_norm, const DisruptionBoundary& boundary) {
  const auto& v = boundary.vertices;
  if (v.size() < 2) throw ConfigError("disruption boundary needs at least two vertices");
  const Vec2 p{ne_edge_norm, H98y2};
  const double inf = std::numeric_limits<double>::infinity();

  double best = inf;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const Vec2 a{v[i].first, v[i].second};
    const Vec2 b{v[i + 1].first, v[i + 1].second};
    best = std::min(best, dist2_to_segment(p, a, b, 1.0));
  }
  // End rays continue the outer segments.
  {
    const Vec2 a{v[0].first, v[0].second};
    const Vec2 b{2 * v[0].first - v[1].first, 2 * v[0].second - v[1].second};
    best = std::min(best, dist2_to_segment(p, a, b, inf));
  }
  {
    const auto n = v.size() - 1;
    const Vec2 a{v[n].first, v[n].second};
    const Vec2 b{2 * v[n].first - v[n - 1].first, 2 * v[n].second - v[n - 1].second};
    best = std::min(best, dist2_to_segment(p, a, b, inf));
  }
  const double d = std::sqrt(best);
  return H98y2 >= boundary.height(ne_edge_norm) ? d : -d;
}

ContinuousSignal nbi_energy_check(double nbi_energy, double limit, double time) {
  return ContinuousSignal{"nbi_energy_frac", nbi_energy / limit, time};
}

SignalFrame plant_signals(const PlantState& state, const PlantParams& params, double time) {
  SignalFrame f;
  f["H98y2"] = state.H98y2;
  f["ne_edge_norm"] = state.ne_edge_norm;
  f["W"] = state.W;
  f["nbi_power"] = state.nbi_power;
  f["nbi_energy"] = state.nbi_energy;
  f["gas_flux"] = state.gas_flux;
  f["d_ne_edge"] = distance(state.H98y2, state.ne_edge_norm, params.boundary);
  f["nbi_energy_frac"] = nbi_energy_check(state.nbi_energy, params.nbi_energy_limit).value;
  for (const auto& [name, wf] : params.scripted) f[name] = wf(time);
  return f;
}

}  // namespace pcs
