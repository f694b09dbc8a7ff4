#pragma once

#include <stdexcept>
#include <string>

namespace squidemu {

/// Bad argument: non-finite value, empty grid, violated config invariant.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// find_isw could not bracket the target switching probability.
class BracketFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// calibrate_noise_levels hit its iteration cap or never closed the hysteresis.
class CalibrationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws InvalidInput naming `what` if v is NaN or infinite.
void require_finite(double v, const char* what);

}  // namespace squidemu
