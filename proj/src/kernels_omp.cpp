#include "squidemu/kernels.hpp"

#include <omp.h>

#include <cstddef>

#include "squidemu/error.hpp"

namespace squidemu::omp {

namespace {

// Per-thread integer histograms merged at the end. Integer addition keeps
// the result independent of thread count and schedule.
void merge(std::vector<std::uint32_t>& into, const std::vector<std::uint32_t>& local)
{
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += local[i];
}

}  // namespace

std::vector<std::uint32_t> pulse_counts(const EmulatorConfig& cfg, std::span<const PulsePoint> points,
                                        std::uint32_t n_pulses, const NoiseSource& noise, OpId op,
                                        std::uint64_t first_point)
{
    std::vector<std::uint32_t> counts(points.size(), 0);
    const auto n_points = static_cast<std::int64_t>(points.size());
    const std::int64_t total = n_points * static_cast<std::int64_t>(n_pulses);

#pragma omp parallel
    {
        std::vector<std::uint32_t> local(points.size(), 0);
#pragma omp for schedule(static)
        for (std::int64_t idx = 0; idx < total; ++idx) {
            const auto p = static_cast<std::size_t>(idx / n_pulses);
            const auto t = static_cast<std::uint64_t>(idx % n_pulses);
            NoiseStream s = noise.stream(op, first_point + p, t);
            const Volts v_th = points[p].v_th_mean + noise.draw(s);
            if (comparator_resistive(Phase::Superconducting, cfg, points[p].i_sq, v_th)) ++local[p];
        }
#pragma omp critical(squidemu_pulse_merge)
        merge(counts, local);
    }
    return counts;
}

std::vector<std::uint32_t> ramp_counts(const EmulatorConfig& cfg, std::span<const Amperes> currents,
                                       std::span<const RampVisit> visits, Volts v_th_mean,
                                       std::uint32_t n_reps, const NoiseSource& noise, OpId op)
{
    if (visits.size() != currents.size()) throw InvalidInput("visit list must match the ramp");
    std::vector<std::uint32_t> counts(currents.size(), 0);
    const auto reps = static_cast<std::int64_t>(n_reps);

#pragma omp parallel
    {
        std::vector<std::uint32_t> local(currents.size(), 0);
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < reps; ++r) {
            Phase phase = Phase::Superconducting;
            for (std::size_t k = 0; k < currents.size(); ++k) {
                const RampKey key = ramp_stream_key(visits[k], static_cast<std::uint32_t>(r), n_reps);
                NoiseStream s = noise.stream(op, key.point, key.trial);
                const Volts v_th = v_th_mean + noise.draw(s);
                phase = comparator_resistive(phase, cfg, currents[k], v_th) ? Phase::Resistive
                                                                            : Phase::Superconducting;
                if (phase == Phase::Resistive) ++local[k];
            }
        }
#pragma omp critical(squidemu_ramp_merge)
        merge(counts, local);
    }
    return counts;
}

std::vector<Volts> vth_samples(Volts v_th_mean, std::size_t n, const NoiseSource& noise, OpId op)
{
    std::vector<Volts> out(n);
    const auto total = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < total; ++t) {
        out[static_cast<std::size_t>(t)] = v_th_mean + noise.draw(op, 0, static_cast<std::uint64_t>(t));
    }
    return out;
}

}  // namespace squidemu::omp
