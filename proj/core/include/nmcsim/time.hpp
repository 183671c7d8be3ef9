#pragma once

#include <cmath>
#include <cstdint>

namespace nmcsim {

// Simulation time is an integer count of picoseconds. Handshake transitions
// are O(100 ps) and neuron dynamics are O(ms); both fit comfortably in 64
// bits (about +/-106 days) and integer ticks make tie-breaking exact.
using TimePs = std::int64_t;

constexpr double kPsPerSecond = 1e12;

inline TimePs time_from_seconds(double s) {
    return static_cast<TimePs>(std::llround(s * kPsPerSecond));
}

inline double time_to_seconds(TimePs t) {
    return static_cast<double>(t) / kPsPerSecond;
}

}  // namespace nmcsim
