#include "pcs/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace pcs {

ControllerOutput feedforward_step(const Waveform& waveform, double time) {
  const double v = waveform(time);
  return {v, v};
}

PidResult pid_step(double reference, double measurement, const PidParams& params,
                   const PidState& state, double dt) {
  if (!(dt > 0.0)) throw ConfigError("pid_step: dt must be positive");
  PidResult out{{state.last_output, state.last_output}, state};
  if (!std::isfinite(measurement) || !std::isfinite(reference)) {
    out.state.fault = true;
    return out;
  }
  out.state.fault = false;

  const double error = reference - measurement;
  double integrator = state.integrator + error * dt;
  if (params.anti_windup && params.ki > 0.0) {
    integrator = std::clamp(integrator, params.lo / params.ki, params.hi / params.ki);
  }
  const double derivative =
      state.primed ? -(measurement - state.previous_measurement) / dt : 0.0;

  const double u = params.kp * error + params.ki * integrator + params.kd * derivative;
  const double clamped = std::clamp(u, params.lo, params.hi);

  out.state.integrator = integrator;
  out.state.previous_measurement = measurement;
  out.state.primed = true;
  out.state.last_output = clamped;
  out.output = {clamped, clamped};
  return out;
}

ControllerOutput da_power_step(double distance, double d_critical1, double gain, double p_max,
                               DaPowerMode mode) {
  if (mode == DaPowerMode::Recovery) return {p_max, p_max};
  if (!(distance < d_critical1)) return {0.0, 0.0};
  const double p = std::min(gain * (d_critical1 - distance), p_max);
  return {p, p};
}

DaGasResult da_gas_step(double base_command, double applied_flux, const DaGasParams& params,
                        const DaGasState& state, double time) {
  DaGasResult out{0.0, state};
  if (!out.state.engaged) {
    out.state = DaGasState{true, applied_flux, base_command, time};
  }
  const auto& s = out.state;
  switch (params.mode) {
    case DaGasMode::SlowRamp:
      out.command = s.entry_flux + params.factor * (base_command - s.entry_base);
      break;
    case DaGasMode::Freeze:
      out.command = s.entry_flux;
      break;
    case DaGasMode::Cutoff:
      if (params.ramp_down > 0.0) {
        out.command = s.entry_flux * std::max(0.0, 1.0 - (time - s.entry_time) / params.ramp_down);
      } else {
        out.command = 0.0;
      }
      break;
  }
  return out;
}

NtmCommand ntm_step(double mode_rho, double granted_power) {
  return {std::clamp(mode_rho, 0.0, 1.0), std::max(0.0, granted_power)};
}

std::string_view kind_name(const ControllerParams& params) {
  struct Visitor {
    std::string_view operator()(const FeedforwardParams&) const { return "feedforward"; }
    std::string_view operator()(const PidParams&) const { return "pid"; }
    std::string_view operator()(const DaPowerParams&) const { return "da_power"; }
    std::string_view operator()(const DaGasParams&) const { return "da_gas"; }
    std::string_view operator()(const NtmParams&) const { return "ntm"; }
  };
  return std::visit(Visitor{}, params);
}

}  // namespace pcs
