#pragma once

// Random inputs for property tests: schedules, plant-signal frames.

#include <random>

#include "pcs/config.hpp"

namespace gen {

using Rng = std::mt19937_64;

/// A random schedule drawn from the same structural space as the shipped
/// ones (a few ONEs of every kind, scenarios of random types, every
/// controller kind). Most draws validate cleanly, a few do not.
pcs::PulseSchedule random_schedule(Rng& rng);

/// One frame with every signal the schedule's ONEs and controllers read.
/// Values random-walk from `previous`; with probability `bad` a value is
/// replaced by NaN or +-inf.
pcs::SignalFrame random_frame(const pcs::PulseSchedule& schedule, const pcs::SignalFrame& previous,
                              Rng& rng, double bad);

}  // namespace gen
