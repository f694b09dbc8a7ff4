#pragma once

#include <cstdint>
#include <limits>

#include "squidemu/units.hpp"

namespace squidemu {

/// Which procedure owns a noise substream. Distinct ops never share draws.
enum class OpId : std::uint32_t {
    Pulse = 1,       // s_curve and pulsed_iv share this so their estimators coincide
    DcIv = 2,
    ModulationMap = 3,
    VthHistogram = 4,
    FindIsw = 5,
    Feedback = 6,
    Session = 7,
};

/// SplitMix64 as a UniformRandomBitGenerator. Each substream is one of these
/// seeded from a hash of its key, so draws never depend on execution order.
class NoiseStream {
public:
    using result_type = std::uint64_t;

    constexpr explicit NoiseStream(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Gaussian threshold noise V_n with keyed, order-independent substreams.
///
/// The value of draw k on stream (seed, op, point, trial) is fixed by those
/// five numbers alone. With sigma == 0 no generator is touched and every
/// draw is exactly zero.
class NoiseSource {
public:
    NoiseSource() = default;
    NoiseSource(Volts sigma, std::uint64_t seed);

    Volts sigma() const { return sigma_; }
    std::uint64_t seed() const { return seed_; }

    NoiseStream stream(OpId op, std::uint64_t point, std::uint64_t trial) const;

    /// Next V_n from an open stream.
    Volts draw(NoiseStream& s) const;

    /// Single-draw convenience: first value of stream (op, point, trial).
    Volts draw(OpId op, std::uint64_t point, std::uint64_t trial) const;

private:
    Volts sigma_ = 0.0;
    std::uint64_t seed_ = 0;
};

/// Unit-variance normal from a stream. Exposed so that scaled draws at
/// different sigma with the same key share their underlying variate.
double standard_normal(NoiseStream& s);

}  // namespace squidemu
