#pragma once

// Monte Carlo trial kernels. Every protocol reduces to one of these loops.
//
// `omp::` is what the protocols call. `serial::` is the straightforward
// reference kept for tests and the benchmark; for identical inputs the two
// return identical results for any thread count, because each trial owns a
// keyed noise substream and the reductions are integer counts.

#include <cstdint>
#include <span>
#include <vector>

#include "squidemu/device.hpp"
#include "squidemu/noise.hpp"
#include "squidemu/units.hpp"

namespace squidemu {

/// One pulse amplitude together with the noise-free threshold it is compared
/// against (V_th0 + V_offset - modulation, plus any external disturbance).
struct PulsePoint {
    Amperes i_sq = 0.0;
    Volts v_th_mean = 0.0;
};

/// Position of a ramp point among the bias levels of its ramp: `level`
/// numbers the distinct currents, `visit` counts earlier points of the same
/// repetition at that level.
struct RampVisit {
    std::uint32_t level = 0;
    std::uint32_t visit = 0;
};

/// Stream key of ramp point `v` in repetition r.
///
/// A first visit draws from the repetition's own stream. The j-th revisit
/// takes the first-visit draw of repetition (r + j) mod n_reps, so inside
/// one repetition every draw is independent while the averaged up and down
/// branches are built from the same set of draws.
struct RampKey {
    std::uint64_t point;
    std::uint64_t trial;
};
inline RampKey ramp_stream_key(RampVisit v, std::uint32_t r, std::uint32_t n_reps)
{
    const std::uint64_t round = v.visit / n_reps;
    return {(round << 32) | v.level, (static_cast<std::uint64_t>(r) + v.visit) % n_reps};
}

namespace serial {

/// Number of switching events out of n_pulses per point. Trial t of point p
/// draws from stream (op, first_point + p, t).
std::vector<std::uint32_t> pulse_counts(const EmulatorConfig& cfg, std::span<const PulsePoint> points,
                                        std::uint32_t n_pulses, const NoiseSource& noise, OpId op,
                                        std::uint64_t first_point = 0);

/// Repeated quasi-static ramps. Each repetition starts superconducting and
/// carries its state from point to point. Returns the number of repetitions
/// that were resistive at each point; the draw each point uses is fixed by
/// ramp_stream_key().
std::vector<std::uint32_t> ramp_counts(const EmulatorConfig& cfg, std::span<const Amperes> currents,
                                       std::span<const RampVisit> visits, Volts v_th_mean,
                                       std::uint32_t n_reps, const NoiseSource& noise, OpId op);

/// n threshold samples; sample t comes from stream (op, 0, t).
std::vector<Volts> vth_samples(Volts v_th_mean, std::size_t n, const NoiseSource& noise, OpId op);

}  // namespace serial

namespace omp {

std::vector<std::uint32_t> pulse_counts(const EmulatorConfig& cfg, std::span<const PulsePoint> points,
                                        std::uint32_t n_pulses, const NoiseSource& noise, OpId op,
                                        std::uint64_t first_point = 0);

std::vector<std::uint32_t> ramp_counts(const EmulatorConfig& cfg, std::span<const Amperes> currents,
                                       std::span<const RampVisit> visits, Volts v_th_mean,
                                       std::uint32_t n_reps, const NoiseSource& noise, OpId op);

std::vector<Volts> vth_samples(Volts v_th_mean, std::size_t n, const NoiseSource& noise, OpId op);

}  // namespace omp

}  // namespace squidemu
