#include "squidemu/tri_converter.hpp"

#include <cmath>

#include "squidemu/error.hpp"

namespace squidemu {

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw InvalidInput(std::string(what) + " must be finite");
    }
}

void TriConfig::validate() const
{
    require_finite(v_fullscale, "v_fullscale");
    require_finite(mod_depth, "mod_depth");
    require_finite(g_dc, "g_dc");
    if (v_fullscale <= 0.0) throw InvalidInput("v_fullscale must be > 0");
    if (mod_depth < 0.0) throw InvalidInput("mod_depth must be >= 0");
    if (g_dc <= 0.0) throw InvalidInput("g_dc must be > 0");
}

AdcCode digitize(Volts v_dc, const TriConfig& cfg)
{
    require_finite(v_dc, "v_dc");
    const double scaled = std::floor(256.0 * std::fabs(v_dc) / cfg.v_fullscale);
    if (scaled >= 255.0) return AdcCode(255);
    return AdcCode(static_cast<std::uint8_t>(scaled));
}

unsigned remap(AdcCode code)
{
    const unsigned mask = code.d6() ? 0x3Fu : 0u;
    return code.low6() ^ mask;
}

Volts tri(Amperes i_dc, const TriConfig& cfg)
{
    require_finite(i_dc, "i_dc");
    const AdcCode code = digitize(cfg.g_dc * i_dc, cfg);
    return cfg.mod_depth * static_cast<double>(remap(code)) / 63.0;
}

}  // namespace squidemu
