#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "squidemu/noise.hpp"
#include "squidemu/tri_converter.hpp"
#include "squidemu/units.hpp"

namespace squidemu {

enum class ModulationMode { Triangular, Sinusoidal };

/// Circuit constants of the emulator. Defaults reproduce the built device:
/// R_in = 1 kOhm, R_sq || R_M = 225 Ohm, V_th0 = 90 mV.
struct EmulatorConfig {
    Ohms r_in = 1000.0;
    Ohms r_normal = 225.0;  // R_sq || R_M, the resistive-state shunt
    Volts v_th0 = 0.090;
    Volts v_offset = 0.0;   // comparator input offset
    Volts noise_sigma = 0.0;
    TriConfig tri_cfg{};
    ModulationMode modulation = ModulationMode::Triangular;
    int taylor_terms = 9;   // only used by ModulationMode::Sinusoidal

    void validate() const;

    /// Noise-free threshold at zero flux bias.
    Volts zero_flux_threshold() const { return v_th0 + v_offset; }

    bool operator==(const EmulatorConfig&) const = default;
};

enum class Phase : std::uint8_t { Superconducting, Resistive };

struct DeviceState {
    Phase phase = Phase::Superconducting;
    Volts last_v_th = 0.0;
};

struct StepResult {
    DeviceState state;
    Volts v_sq = 0.0;
    // |v_sq| beyond the MOSFET linear range; the value is still reported.
    bool saturated = false;
};

inline constexpr Volts kMosfetLinearLimit = 0.5;

/// Flux-dependent part subtracted from the threshold: tri() or its
/// sinusoidal replacement depending on cfg.modulation.
Volts modulation(const EmulatorConfig& cfg, Amperes i_dc);

/// Noise-free threshold V_th0 + V_offset - Tri(|V_DC|).
Volts threshold_mean(const EmulatorConfig& cfg, Amperes i_dc);

/// V_th = V_th0 + V_offset + V_n - Tri(|V_DC|), evaluated as
/// threshold_mean() + v_n so the kernels reproduce it bit for bit.
Volts threshold(const EmulatorConfig& cfg, Amperes i_dc, Volts v_n);

/// One comparator evaluation.
///
/// The comparator sees |i_sq| (R_in + R(phase)) against V_th, with R = 0 in
/// the superconducting phase and r_normal in the resistive one. From the
/// superconducting side that switches at V_th / R_in; from the resistive side
/// it retraps below V_th / (R_in + r_normal).
StepResult step(const DeviceState& state, const EmulatorConfig& cfg, Amperes i_sq, Amperes i_dc,
                Volts v_n);

/// Same comparison as step() with a precomputed threshold. Hot loops use
/// this to avoid re-running the converter for every trial.
inline bool comparator_resistive(Phase phase, const EmulatorConfig& cfg, Amperes i_sq, Volts v_th)
{
    const Ohms series = cfg.r_in + (phase == Phase::Resistive ? cfg.r_normal : 0.0);
    const Amperes mag = i_sq < 0 ? -i_sq : i_sq;
    return mag * series > v_th;
}

Amperes retrap_current(const EmulatorConfig& cfg, Volts v_th);
Amperes switching_current(const EmulatorConfig& cfg, Volts v_th);

/// Threshold samples taken at a fixed flux bias, as probed at the comparator
/// input.
struct VthSamples {
    std::vector<Volts> samples;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)

    struct Bin {
        Volts center;
        std::size_t count;
    };
    /// Equal-width bins over [min, max] of the samples.
    std::vector<Bin> histogram(std::size_t n_bins) const;
};

VthSamples sample_vth_histogram(const EmulatorConfig& cfg, Amperes i_dc, std::size_t n,
                                const NoiseSource& noise);

}  // namespace squidemu
