#include "squidemu/noise.hpp"

#include <random>

#include "squidemu/error.hpp"

namespace squidemu {

namespace {

constexpr std::uint64_t mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

NoiseSource::NoiseSource(Volts sigma, std::uint64_t seed) : sigma_(sigma), seed_(seed)
{
    require_finite(sigma, "noise sigma");
    if (sigma < 0.0) throw InvalidInput("noise sigma must be >= 0");
}

NoiseStream NoiseSource::stream(OpId op, std::uint64_t point, std::uint64_t trial) const
{
    std::uint64_t h = mix(seed_ + 0x9E3779B97F4A7C15ull);
    h = mix(h ^ (static_cast<std::uint64_t>(op) * 0xD6E8FEB86659FD93ull));
    h = mix(h ^ (point + 0x632BE59BD9B4E019ull));
    h = mix(h ^ (trial + 0x8CB92BA72F3D8DD7ull));
    return NoiseStream(h);
}

double standard_normal(NoiseStream& s)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(s);
}

Volts NoiseSource::draw(NoiseStream& s) const
{
    if (sigma_ == 0.0) return 0.0;
    return sigma_ * standard_normal(s);
}

Volts NoiseSource::draw(OpId op, std::uint64_t point, std::uint64_t trial) const
{
    if (sigma_ == 0.0) return 0.0;
    NoiseStream s = stream(op, point, trial);
    return draw(s);
}

}  // namespace squidemu
