#pragma once

// Generic task controllers. Each step returns what the controller asks the
// actuator manager for and the command it would issue; the control loop
// trims the command to the grant it actually receives.

#include <optional>
#include <string>
#include <variant>

#include "pcs/state_model.hpp"

namespace pcs {

/// Request (resource amount wanted) and command (value to apply) from one step.
struct ControllerOutput {
  double request = 0.0;
  double command = 0.0;

  bool operator==(const ControllerOutput&) const = default;
};

// ---------------------------------------------------------------------------
// Feedforward
// ---------------------------------------------------------------------------

struct FeedforwardParams {
  Waveform waveform;

  bool operator==(const FeedforwardParams&) const = default;
};

ControllerOutput feedforward_step(const Waveform& waveform, double time);

// ---------------------------------------------------------------------------
// PID
// ---------------------------------------------------------------------------

struct PidParams {
  std::string measurement;  // signal name
  std::optional<Waveform> reference;
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool anti_windup = true;

  bool operator==(const PidParams&) const = default;
};

struct PidState {
  double integrator = 0.0;  // integral of the error, s * error units
  double previous_measurement = 0.0;
  double last_output = 0.0;
  bool primed = false;  // previous_measurement is valid
  bool fault = false;   // last measurement was not finite

  bool operator==(const PidState&) const = default;
};

struct PidResult {
  ControllerOutput output;
  PidState state;
};

/// Positional PID on error = reference - measurement, derivative taken on
/// the measurement, output clamped to [lo, hi]. With anti-windup the
/// integral contribution ki * integrator is kept inside [lo, hi].
PidResult pid_step(double reference, double measurement, const PidParams& params,
                   const PidState& state, double dt);

// ---------------------------------------------------------------------------
// Disruption avoidance: heating power
// ---------------------------------------------------------------------------

enum class DaPowerMode : std::uint8_t { Normal, Recovery };

struct DaPowerParams {
  DaPowerMode mode = DaPowerMode::Normal;
  std::string distance_signal;
  double d_critical1 = 0.0;
  double gain = 0.0;
  double p_max = 0.0;

  bool operator==(const DaPowerParams&) const = default;
};

/// Normal: 0 at or above d_critical1, else gain * (d_critical1 - distance)
/// capped at p_max. Recovery: p_max.
ControllerOutput da_power_step(double distance, double d_critical1, double gain, double p_max,
                               DaPowerMode mode);

// ---------------------------------------------------------------------------
// Disruption avoidance: gas flux
// ---------------------------------------------------------------------------

enum class DaGasMode : std::uint8_t { SlowRamp, Freeze, Cutoff };

struct DaGasParams {
  DaGasMode mode = DaGasMode::SlowRamp;
  std::string base;     // feedforward controller providing the nominal ramp
  double factor = 0.0;  // SlowRamp rate scale in [0, 1]
  double ramp_down = 0.0;  // Cutoff duration, s

  bool operator==(const DaGasParams&) const = default;
};

/// Values captured when the mode is entered.
struct DaGasState {
  bool engaged = false;
  double entry_flux = 0.0;
  double entry_base = 0.0;
  double entry_time = 0.0;

  bool operator==(const DaGasState&) const = default;
};

struct DaGasResult {
  double command = 0.0;
  DaGasState state;
};

/// `base_command` is the nominal feedforward flux now; `applied_flux` is the
/// flux currently applied to the plant, captured on the first engaged call.
DaGasResult da_gas_step(double base_command, double applied_flux, const DaGasParams& params,
                        const DaGasState& state, double time);

// ---------------------------------------------------------------------------
// NTM stabilization
// ---------------------------------------------------------------------------

struct NtmParams {
  std::string position_signal;
  std::string launcher_group;
  std::optional<double> power_request;  // defaults to the power group's availability

  bool operator==(const NtmParams&) const = default;
};

struct NtmCommand {
  double deposition = 0.0;  // normalized radius
  double power = 0.0;

  bool operator==(const NtmCommand&) const = default;
};

/// Aim at the mode and use the full granted power.
NtmCommand ntm_step(double mode_rho, double granted_power);

// ---------------------------------------------------------------------------

using ControllerParams =
    std::variant<FeedforwardParams, PidParams, DaPowerParams, DaGasParams, NtmParams>;

struct ControllerConfig {
  std::string id;
  std::string group;  // output group (power group for NTM)
  ControllerParams params;

  bool operator==(const ControllerConfig&) const = default;
};

std::string_view kind_name(const ControllerParams& params);

}  // namespace pcs
