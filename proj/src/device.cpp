#include "squidemu/device.hpp"

#include <algorithm>
#include <cmath>

#include "squidemu/error.hpp"
#include "squidemu/kernels.hpp"
#include "squidemu/reference_model.hpp"

namespace squidemu {

void EmulatorConfig::validate() const
{
    tri_cfg.validate();
    require_finite(r_in, "r_in");
    require_finite(r_normal, "r_normal");
    require_finite(v_th0, "v_th0");
    require_finite(v_offset, "v_offset");
    require_finite(noise_sigma, "noise_sigma");
    if (r_in <= 0.0) throw InvalidInput("r_in must be > 0");
    if (r_normal < 0.0) throw InvalidInput("r_normal must be >= 0");
    if (v_th0 <= 0.0) throw InvalidInput("v_th0 must be > 0");
    if (noise_sigma < 0.0) throw InvalidInput("noise_sigma must be >= 0");
    if (zero_flux_threshold() <= tri_cfg.mod_depth) {
        throw InvalidInput("v_th0 + v_offset must exceed mod_depth");
    }
    if (taylor_terms < 1) throw InvalidInput("taylor_terms must be >= 1");
}

Volts modulation(const EmulatorConfig& cfg, Amperes i_dc)
{
    if (cfg.modulation == ModulationMode::Sinusoidal) {
        return sinusoidal_tri_mode(i_dc, cfg.tri_cfg, cfg.taylor_terms);
    }
    return tri(i_dc, cfg.tri_cfg);
}

Volts threshold_mean(const EmulatorConfig& cfg, Amperes i_dc)
{
    return cfg.zero_flux_threshold() - modulation(cfg, i_dc);
}

Volts threshold(const EmulatorConfig& cfg, Amperes i_dc, Volts v_n)
{
    return threshold_mean(cfg, i_dc) + v_n;
}

StepResult step(const DeviceState& state, const EmulatorConfig& cfg, Amperes i_sq, Amperes i_dc,
                Volts v_n)
{
    require_finite(i_sq, "i_sq");
    require_finite(v_n, "v_n");
    const Volts v_th = threshold(cfg, i_dc, v_n);

    StepResult out;
    out.state.last_v_th = v_th;
    out.state.phase = comparator_resistive(state.phase, cfg, i_sq, v_th) ? Phase::Resistive
                                                                         : Phase::Superconducting;
    out.v_sq = out.state.phase == Phase::Resistive ? i_sq * cfg.r_normal : 0.0;
    out.saturated = std::fabs(out.v_sq) > kMosfetLinearLimit;
    return out;
}

Amperes retrap_current(const EmulatorConfig& cfg, Volts v_th)
{
    return v_th / (cfg.r_in + cfg.r_normal);
}

Amperes switching_current(const EmulatorConfig& cfg, Volts v_th)
{
    return v_th / cfg.r_in;
}

std::vector<VthSamples::Bin> VthSamples::histogram(std::size_t n_bins) const
{
    if (n_bins == 0) throw InvalidInput("histogram needs at least one bin");
    std::vector<Bin> bins;
    if (samples.empty()) return bins;
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo) {
        bins.push_back({lo, samples.size()});
        return bins;
    }
    const double width = (hi - lo) / static_cast<double>(n_bins);
    bins.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bins[b] = {lo + (static_cast<double>(b) + 0.5) * width, 0};
    }
    for (const double v : samples) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        ++bins[std::min(b, n_bins - 1)].count;
    }
    return bins;
}

VthSamples sample_vth_histogram(const EmulatorConfig& cfg, Amperes i_dc, std::size_t n,
                                const NoiseSource& noise)
{
    if (n == 0) throw InvalidInput("need at least one threshold sample");
    VthSamples out;
    out.samples = omp::vth_samples(threshold_mean(cfg, i_dc), n, noise, OpId::VthHistogram);

    // Welford: a constant sample set gives exactly zero spread.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (const double v : out.samples) {
        ++k;
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    out.mean = mean;
    out.stddev = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
    return out;
}

}  // namespace squidemu
