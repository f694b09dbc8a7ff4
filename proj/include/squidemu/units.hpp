#pragma once

namespace squidemu {

// SI units throughout. The aliases document intent at API boundaries.
using Volts = double;
using Amperes = double;
using Ohms = double;
using VoltsPerAmpere = double;

}  // namespace squidemu
