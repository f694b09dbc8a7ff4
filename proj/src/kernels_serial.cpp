#include "squidemu/kernels.hpp"

#include "squidemu/error.hpp"

namespace squidemu::serial {

std::vector<std::uint32_t> pulse_counts(const EmulatorConfig& cfg, std::span<const PulsePoint> points,
                                        std::uint32_t n_pulses, const NoiseSource& noise, OpId op,
                                        std::uint64_t first_point)
{
    std::vector<std::uint32_t> counts(points.size(), 0);
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::uint32_t t = 0; t < n_pulses; ++t) {
            const Volts v_th = points[p].v_th_mean + noise.draw(op, first_point + p, t);
            if (comparator_resistive(Phase::Superconducting, cfg, points[p].i_sq, v_th)) {
                ++counts[p];
            }
        }
    }
    return counts;
}

std::vector<std::uint32_t> ramp_counts(const EmulatorConfig& cfg, std::span<const Amperes> currents,
                                       std::span<const RampVisit> visits, Volts v_th_mean,
                                       std::uint32_t n_reps, const NoiseSource& noise, OpId op)
{
    if (visits.size() != currents.size()) throw InvalidInput("visit list must match the ramp");
    std::vector<std::uint32_t> counts(currents.size(), 0);
    for (std::uint32_t r = 0; r < n_reps; ++r) {
        Phase phase = Phase::Superconducting;
        for (std::size_t k = 0; k < currents.size(); ++k) {
            const RampKey key = ramp_stream_key(visits[k], r, n_reps);
            const Volts v_th = v_th_mean + noise.draw(op, key.point, key.trial);
            phase = comparator_resistive(phase, cfg, currents[k], v_th) ? Phase::Resistive
                                                                        : Phase::Superconducting;
            if (phase == Phase::Resistive) ++counts[k];
        }
    }
    return counts;
}

std::vector<Volts> vth_samples(Volts v_th_mean, std::size_t n, const NoiseSource& noise, OpId op)
{
    std::vector<Volts> out(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = v_th_mean + noise.draw(op, 0, t);
    return out;
}

}  // namespace squidemu::serial
