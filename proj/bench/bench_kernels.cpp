// Serial reference kernels against their OpenMP counterparts. Thread count
// follows OMP_NUM_THREADS; the argument is the problem size.

#include <benchmark/benchmark.h>

#include <omp.h>

#include <vector>

#include "squidemu/kernels.hpp"
#include "squidemu/protocols.hpp"

using namespace squidemu;

namespace {

EmulatorConfig noisy()
{
    EmulatorConfig cfg;
    cfg.noise_sigma = 5e-3;
    return cfg;
}

std::vector<PulsePoint> s_curve_points()
{
    std::vector<PulsePoint> pts;
    for (const Amperes i : linear_grid(0.0, 120e-6, 121)) pts.push_back({i, 0.090});
    return pts;
}

template <auto Kernel>
void pulses(benchmark::State& state)
{
    const EmulatorConfig cfg = noisy();
    const auto pts = s_curve_points();
    const NoiseSource noise(cfg.noise_sigma, 1);
    const auto n = static_cast<std::uint32_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(cfg, pts, n, noise, OpId::Pulse, 0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()) * n);
    state.counters["threads"] = omp_get_max_threads();
}

template <auto Kernel>
void ramps(benchmark::State& state)
{
    const EmulatorConfig cfg = noisy();
    const SweepPlan plan = SweepPlan::triangle_ramp(0.0, 120e-6, 120, 1, 1);
    std::vector<RampVisit> visits;
    for (std::size_t k = 0; k < plan.currents.size(); ++k) {
        const auto level = static_cast<std::uint32_t>(k <= 120 ? k : 240 - k);
        visits.push_back({level, k <= 120 ? 0u : 1u});
    }
    const NoiseSource noise(cfg.noise_sigma, 1);
    const auto reps = static_cast<std::uint32_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(Kernel(cfg, plan.currents, visits, 0.090, reps, noise, OpId::DcIv));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plan.currents.size()) * reps);
    state.counters["threads"] = omp_get_max_threads();
}

template <auto Kernel>
void thresholds(benchmark::State& state)
{
    const NoiseSource noise(5e-3, 1);
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(0.090, n, noise, OpId::VthHistogram));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
    state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(pulses<serial::pulse_counts>)->Name("pulse_counts/serial")->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(pulses<omp::pulse_counts>)->Name("pulse_counts/omp")->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(ramps<serial::ramp_counts>)->Name("ramp_counts/serial")->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(ramps<omp::ramp_counts>)->Name("ramp_counts/omp")->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(thresholds<serial::vth_samples>)->Name("vth_samples/serial")->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(thresholds<omp::vth_samples>)->Name("vth_samples/omp")->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
