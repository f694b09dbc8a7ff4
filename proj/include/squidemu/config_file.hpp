#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "squidemu/device.hpp"
#include "squidemu/protocols.hpp"

namespace squidemu {

/// Everything a run needs: the circuit plus protocol defaults.
///
/// On disk this is a flat `key = value` file, one assignment per line, SI
/// units, `#` starting a comment. Keys are the member names below; the
/// emulator keys are r_in, r_normal, v_th0, v_offset, noise_sigma,
/// mod_depth, v_fullscale, g_dc, modulation (triangular|sinusoidal) and
/// taylor_terms. Unknown keys and repeated keys are errors.
struct ExperimentConfig {
    EmulatorConfig emulator{};

    std::uint64_t seed = 1;
    std::uint32_t n_pulses = kDefaultPulses;
    std::uint32_t n_avg = 5000;

    Amperes i_sq_min = 0.0;
    Amperes i_sq_max = 120e-6;
    std::uint32_t i_sq_points = 121;

    Amperes i_dc = 0.0;
    Amperes i_dc_min = -2e-3;
    Amperes i_dc_max = 2e-3;
    std::uint32_t i_dc_points = 161;

    std::uint32_t hist_samples = 100000;
    std::uint32_t hist_bins = 50;

    double fb_gain = 8e-5;
    std::uint32_t fb_iters = 300;
    std::uint32_t fb_step_at = 100;
    Volts fb_step = 0.010;

    Volts cal_sigma_max = 0.2;
    Volts cal_resolution = 1e-4;
    double cal_closure = 0.02;

    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Throws InvalidInput with the offending line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Serialize in the same format; parse_config(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& cfg);

}  // namespace squidemu
