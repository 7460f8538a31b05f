#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pcs/controllers.hpp"

namespace {

using namespace pcs;

// Discrete PID closed around y' = (u - y) / tau with an exact ZOH plant.
std::vector<double> discrete_response(const PidParams& p, double tau, double setpoint, double t_end,
                                      double dt) {
  PidState s;
  double y = 0.0;
  std::vector<double> out{y};
  const auto steps = static_cast<int>(std::lround(t_end / dt));
  for (int k = 0; k < steps; ++k) {
    auto r = pid_step(setpoint, y, p, s, dt);
    s = r.state;
    const double u = r.output.command;
    y = u + (y - u) * std::exp(-dt / tau);
    out.push_back(y);
  }
  return out;
}

TEST(Pid, StepResponseMatchesFineStepIntegration) {
  PidParams p{"y", std::nullopt, 2.0, 1.5, 0.05, -100.0, 100.0, true};
  const double dt = 1e-3;
  const double tau = 0.5;
  const auto got = discrete_response(p, tau, 1.0, 5.0, dt);
  const auto want = oracle::pid_first_order_response({p.kp, p.ki, p.kd}, tau, 1.0, 5.0, dt / 100, 100);
  ASSERT_EQ(got.size(), want.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
  EXPECT_LT(worst, 0.01);  // 1% of the unit step
}

TEST(Pid, ClampsOutput) {
  PidParams p{"y", std::nullopt, 100.0, 0.0, 0.0, -1.0, 2.0, true};
  EXPECT_DOUBLE_EQ(pid_step(1.0, 0.0, p, {}, 1e-3).output.command, 2.0);
  EXPECT_DOUBLE_EQ(pid_step(-1.0, 0.0, p, {}, 1e-3).output.command, -1.0);
}

TEST(Pid, DerivativeActsOnMeasurementOnly) {
  PidParams p{"y", std::nullopt, 0.0, 0.0, 1.0, -1e9, 1e9, true};
  PidState s;
  s = pid_step(0.0, 0.0, p, s, 0.1).state;
  // A reference step gives no derivative kick.
  EXPECT_DOUBLE_EQ(pid_step(5.0, 0.0, p, s, 0.1).output.command, 0.0);
  EXPECT_NEAR(pid_step(0.0, 0.5, p, s, 0.1).output.command, -5.0, 1e-12);
}

TEST(Pid, NonFiniteMeasurementHoldsLastOutput) {
  PidParams p{"y", std::nullopt, 1.0, 1.0, 0.0, -10.0, 10.0, true};
  auto r = pid_step(1.0, 0.2, p, {}, 0.01);
  auto held = pid_step(1.0, std::nan(""), p, r.state, 0.01);
  EXPECT_TRUE(held.state.fault);
  EXPECT_DOUBLE_EQ(held.output.command, r.output.command);
  EXPECT_DOUBLE_EQ(held.state.integrator, r.state.integrator);
  auto back = pid_step(1.0, 0.2, p, held.state, 0.01);
  EXPECT_FALSE(back.state.fault);
}

TEST(Pid, RejectsNonPositiveDt) {
  PidParams p{"y", std::nullopt, 1.0, 0.0, 0.0, -1.0, 1.0, true};
  EXPECT_THROW(pid_step(0.0, 0.0, p, {}, 0.0), ConfigError);
}

// With limits bracketing zero, the integral contribution stays within the
// output span however long the error persists.
TEST(Pid, AntiWindupBoundsIntegralContribution) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double lo = -u(rng) * 2.0;
    const double hi = u(rng) * 2.0;
    PidParams p{"y", std::nullopt, u(rng) * 5, 0.1 + u(rng) * 20, u(rng) * 0.1, lo, hi, true};
    PidState s;
    for (int k = 0; k < 2000; ++k) {
      const double meas = (k / 500) % 2 == 0 ? -50.0 : 50.0;  // long saturating errors
      s = pid_step(0.0, meas, p, s, 1e-3).state;
      ASSERT_LE(std::abs(p.ki * s.integrator), (hi - lo) + 1e-12);
    }
  }
}

TEST(Pid, WithoutAntiWindupIntegratorGrows) {
  PidParams p{"y", std::nullopt, 0.0, 1.0, 0.0, -1.0, 1.0, false};
  PidState s;
  for (int k = 0; k < 1000; ++k) s = pid_step(1.0, 0.0, p, s, 0.01).state;
  EXPECT_NEAR(s.integrator, 10.0, 1e-9);
}

TEST(DaPower, ProportionalBelowFirstCriticalDistance) {
  EXPECT_EQ(da_power_step(0.5, 0.35, 4.0, 0.65, DaPowerMode::Normal), (ControllerOutput{0.0, 0.0}));
  EXPECT_EQ(da_power_step(0.35, 0.35, 4.0, 0.65, DaPowerMode::Normal), (ControllerOutput{0.0, 0.0}));
  EXPECT_NEAR(da_power_step(0.30, 0.35, 4.0, 0.65, DaPowerMode::Normal).command, 0.2, 1e-12);
  EXPECT_DOUBLE_EQ(da_power_step(0.0, 0.35, 4.0, 0.65, DaPowerMode::Normal).command, 0.65);
  EXPECT_DOUBLE_EQ(da_power_step(0.9, 0.35, 4.0, 1.3, DaPowerMode::Recovery).request, 1.3);
}

TEST(DaGas, SlowRampScalesTheBaseRampFromEntry) {
  DaGasParams p{DaGasMode::SlowRamp, "ff", 0.3, 0.0};
  auto r = da_gas_step(1.0, 0.9, p, {}, 0.5);
  EXPECT_DOUBLE_EQ(r.command, 0.9);
  r = da_gas_step(2.0, 123.0, p, r.state, 1.5);  // applied flux ignored once engaged
  EXPECT_DOUBLE_EQ(r.command, 0.9 + 0.3 * 1.0);
}

TEST(DaGas, FreezeHoldsEntryFlux) {
  DaGasParams p{DaGasMode::Freeze, "", 0.0, 0.0};
  auto r = da_gas_step(1.0, 0.8, p, {}, 0.0);
  for (int k = 0; k < 5; ++k) r = da_gas_step(1.0 + k, 0.1 * k, p, r.state, k * 0.1);
  EXPECT_DOUBLE_EQ(r.command, 0.8);
}

TEST(DaGas, CutoffRampsToZero) {
  DaGasParams p{DaGasMode::Cutoff, "", 0.0, 0.2};
  auto r = da_gas_step(0.0, 1.0, p, {}, 1.0);
  EXPECT_DOUBLE_EQ(r.command, 1.0);
  EXPECT_NEAR(da_gas_step(0.0, 0.0, p, r.state, 1.1).command, 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(da_gas_step(0.0, 0.0, p, r.state, 1.3).command, 0.0);
  DaGasParams instant{DaGasMode::Cutoff, "", 0.0, 0.0};
  EXPECT_DOUBLE_EQ(da_gas_step(0.0, 1.0, instant, {}, 0.0).command, 0.0);
}

TEST(Ntm, AimsAtModeAndUsesGrant) {
  EXPECT_EQ(ntm_step(0.55, 0.75), (NtmCommand{0.55, 0.75}));
  EXPECT_EQ(ntm_step(1.4, -1.0), (NtmCommand{1.0, 0.0}));
}

TEST(Controllers, KindNames) {
  EXPECT_EQ(kind_name(FeedforwardParams{}), "feedforward");
  EXPECT_EQ(kind_name(PidParams{}), "pid");
  EXPECT_EQ(kind_name(DaPowerParams{}), "da_power");
  EXPECT_EQ(kind_name(DaGasParams{}), "da_gas");
  EXPECT_EQ(kind_name(NtmParams{}), "ntm");
}

}  // namespace
