#pragma once

// 0-D surrogate of the tokamak-dependent layer: stored energy and edge
// density respond to heating power and gas flux, confinement degrades with
// density, and the state disrupts when it crosses an empirical boundary in
// the (ne_edge_norm, H98y2) plane.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pcs/state_model.hpp"

namespace pcs {

/// Piecewise-linear curve H98y2 = B(ne_edge_norm), vertices in increasing
/// density. The first and last segments extend as rays, so the curve splits
/// the plane into a stable side (above) and an unstable side (below).
struct DisruptionBoundary {
  std::vector<std::pair<double, double>> vertices;  // (ne_edge_norm, H98y2)

  /// Boundary height at `ne`, linearly extrapolated past the end vertices.
  double height(double ne) const;

  bool operator==(const DisruptionBoundary&) const = default;
};

struct PlantParams {
  double tau_E = 0.05;    // s, energy confinement time without degradation
  double tau_98 = 0.05;   // s, scaling-law confinement time
  double tau_n = 0.1;     // s, edge density response time
  double k_gas = 1.0;     // density per unit gas flux at equilibrium
  double P_ohmic = 0.0;   // MW
  double nbi_energy_limit = 1.3;  // MJ
  double initial_W = 0.0;           // MJ
  double initial_ne_edge_norm = 0.0;
  std::vector<std::pair<double, double>> degradation;  // (ne_edge_norm, factor), decreasing
  DisruptionBoundary boundary;
  std::string nbi_group;  // actuator group feeding NBI power
  std::string gas_group;  // actuator group feeding the gas valve
  std::map<std::string, Waveform> scripted;  // extra signals played back by time

  bool operator==(const PlantParams&) const = default;
};

struct PlantState {
  double H98y2 = 0.0;
  double ne_edge_norm = 0.0;
  double W = 0.0;           // MJ
  double nbi_power = 0.0;   // MW
  double nbi_energy = 0.0;  // MJ
  double gas_flux = 0.0;
  double time = 0.0;  // s
  bool disrupted = false;

  bool operator==(const PlantState&) const = default;
};

struct PlantCommands {
  double nbi_power = 0.0;
  double gas_flux = 0.0;
};

double degradation_factor(const PlantParams& params, double ne_edge_norm);

PlantState initial_plant_state(const PlantParams& params);

/// One control period. The two linear lags (stored energy, edge density) use
/// their exact zero-order-hold update; NBI energy accumulates dt * power.
/// A disrupted state only advances its time. Throws SimFault on non-finite
/// commands.
PlantState plant_step(const PlantCommands& commands, const PlantState& state, double dt,
                      const PlantParams& params);

/// Signed Euclidean distance from (ne_edge_norm, H98y2) to the boundary:
/// positive on the stable side, negative past the limit.
double distance(double H98y2, double ne_edge_norm, const DisruptionBoundary& boundary);

/// NBI energy as a fraction of its budget, the actuator energy-limit signal.
ContinuousSignal nbi_energy_check(double nbi_energy, double limit, double time = 0.0);

/// Every signal the plant exposes to the monitor and controllers.
SignalFrame plant_signals(const PlantState& state, const PlantParams& params, double time);

}  // namespace pcs
