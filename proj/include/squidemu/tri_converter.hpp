#pragma once

#include <cstdint>

#include "squidemu/units.hpp"

namespace squidemu {

/// Raw 8-bit digitization of the rectified flux-bias voltage.
///
/// D7 selects the half of the input range, D6 the slope direction, and the
/// low six bits feed the XOR remap.
class AdcCode {
public:
    constexpr AdcCode() = default;
    constexpr explicit AdcCode(std::uint8_t code) : code_(code) {}

    constexpr std::uint8_t code() const { return code_; }
    constexpr unsigned d7() const { return (code_ >> 7) & 1u; }
    constexpr unsigned d6() const { return (code_ >> 6) & 1u; }
    constexpr unsigned low6() const { return code_ & 0x3Fu; }

    friend constexpr bool operator==(AdcCode, AdcCode) = default;

private:
    std::uint8_t code_ = 0;
};

struct TriConfig {
    Volts v_fullscale = 5.0;       // ADC full scale
    Volts mod_depth = 0.040;       // Tri peak after the output divider
    VoltsPerAmpere g_dc = 2500.0;  // I_DC -> V_DC, 2 mA maps to full scale

    // Throws InvalidInput on a violated invariant.
    void validate() const;

    /// Largest |I_DC| the ADC resolves before clamping at the top code.
    Amperes idc_fullscale() const { return v_fullscale / g_dc; }
    /// I_DC span of one full triangle period (half the ADC range).
    Amperes idc_period() const { return idc_fullscale() / 2.0; }

    bool operator==(const TriConfig&) const = default;
};

/// Rectify and quantize: code = clamp(floor(256 |v| / fullscale), 0, 255).
AdcCode digitize(Volts v_dc, const TriConfig& cfg);

/// XOR the low six bits with D6 so the 6-bit output turns around instead of
/// wrapping. Result is in [0, 63].
unsigned remap(AdcCode code);

/// Output of the full converter chain for a flux-bias current, in
/// [0, mod_depth]. Even in i_dc because of the input rectifier.
Volts tri(Amperes i_dc, const TriConfig& cfg);

/// One DAC step of the Tri output.
inline Volts tri_step(const TriConfig& cfg) { return cfg.mod_depth / 63.0; }

}  // namespace squidemu
