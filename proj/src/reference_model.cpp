#include "squidemu/reference_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "squidemu/error.hpp"

namespace squidemu {

Amperes ideal_isw(const IdealSquidParams& p)
{
    return 2.0 * p.i_c * std::fabs(std::cos(std::numbers::pi * p.flux));
}

double taylor_cos(double x, int n_terms)
{
    if (n_terms < 1) throw InvalidInput("taylor_cos needs at least one term");
    const double x2 = x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k + 1 < n_terms; ++k) {
        term *= -x2 / static_cast<double>((2 * k + 1) * (2 * k + 2));
        sum += term;
    }
    return sum;
}

Volts sinusoidal_tri_mode(Amperes i_dc, const TriConfig& cfg, int n_terms)
{
    require_finite(i_dc, "i_dc");
    if (n_terms < 1) throw InvalidInput("sinusoidal mode needs at least one Taylor term");
    const Volts v = std::min(std::fabs(cfg.g_dc * i_dc), cfg.v_fullscale);
    const double flux = v / (cfg.v_fullscale / 2.0);
    // |cos| has period pi; fold into [-pi/2, pi/2] where the series converges fast.
    const double phase = std::numbers::pi * (flux - std::round(flux));
    const double c = std::fabs(taylor_cos(phase, n_terms));
    return cfg.mod_depth * std::max(0.0, 1.0 - c);
}

}  // namespace squidemu
