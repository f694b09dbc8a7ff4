#pragma once

#include "squidemu/tri_converter.hpp"
#include "squidemu/units.hpp"

namespace squidemu {

/// Ideal symmetric DC-SQUID. Flux is in units of the flux quantum.
struct IdealSquidParams {
    Amperes i_c = 10e-6;
    double flux = 0.0;
};

/// 2 I_c |cos(pi flux)|.
Amperes ideal_isw(const IdealSquidParams& p);

/// Truncated Maclaurin series of cos(x) with n_terms terms, built by term
/// recursion so no factorial or power is formed explicitly.
double taylor_cos(double x, int n_terms);

/// Sinusoidal drop-in for tri().
///
/// Phase convention: the rectified bias voltage is read as flux in units of
/// one triangle period (v_fullscale / 2), and the output is
/// mod_depth * (1 - |cos(pi * flux)|) with the cosine taken from
/// taylor_cos after reducing the argument to [-pi/2, pi/2]. The output is 0
/// wherever tri() is 0 at a period boundary and mod_depth at mid-period,
/// matching the triangular mode's extrema. Inputs beyond full scale clamp
/// like the ADC does.
Volts sinusoidal_tri_mode(Amperes i_dc, const TriConfig& cfg, int n_terms);

}  // namespace squidemu
