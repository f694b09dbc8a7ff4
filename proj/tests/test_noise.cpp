#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <vector>

#include "squidemu/error.hpp"
#include "squidemu/noise.hpp"

using namespace squidemu;

TEST_CASE("keyed draws do not depend on the order they are taken in")
{
    const NoiseSource noise(5e-3, 99);
    std::vector<double> forward, backward(50);
    for (std::uint64_t t = 0; t < 50; ++t) forward.push_back(noise.draw(OpId::Pulse, 3, t));
    for (std::uint64_t t = 50; t-- > 0;) backward[t] = noise.draw(OpId::Pulse, 3, t);
    CHECK(forward == backward);
}

TEST_CASE("sequential draws on one stream are reproducible")
{
    const NoiseSource noise(1.0, 5);
    NoiseStream a = noise.stream(OpId::DcIv, 1, 2);
    NoiseStream b = noise.stream(OpId::DcIv, 1, 2);
    for (int k = 0; k < 20; ++k) CHECK(noise.draw(a) == noise.draw(b));
}

TEST_CASE("different keys give different draws")
{
    const NoiseSource noise(1.0, 5);
    const double base = noise.draw(OpId::Pulse, 0, 0);
    CHECK(base != noise.draw(OpId::Pulse, 0, 1));
    CHECK(base != noise.draw(OpId::Pulse, 1, 0));
    CHECK(base != noise.draw(OpId::DcIv, 0, 0));
    CHECK(base != NoiseSource(1.0, 6).draw(OpId::Pulse, 0, 0));
}

TEST_CASE("zero sigma is exactly silent")
{
    const NoiseSource noise(0.0, 1);
    for (std::uint64_t t = 0; t < 100; ++t) CHECK(noise.draw(OpId::Pulse, 0, t) == 0.0);
}

TEST_CASE("draws scale with sigma on a shared key")
{
    const double a = NoiseSource(1.0, 8).draw(OpId::Pulse, 4, 4);
    const double b = NoiseSource(0.25, 8).draw(OpId::Pulse, 4, 4);
    CHECK(b == rel(0.25 * a));
}

TEST_CASE("Gaussian moments")
{
    const double sigma = 3e-3;
    const NoiseSource noise(sigma, 2024);
    const int n = 200000;
    double sum = 0, sum2 = 0, sum4 = 0;
    for (int t = 0; t < n; ++t) {
        const double v = noise.draw(OpId::VthHistogram, 0, static_cast<std::uint64_t>(t));
        sum += v;
        sum2 += v * v;
        sum4 += v * v * v * v;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean) < 4 * sigma / std::sqrt(n));
    CHECK(std::sqrt(var) == rel(sigma).epsilon(0.01));
    CHECK(sum4 / n / (var * var) == rel(3.0).epsilon(0.05));
}

TEST_CASE("negative or non-finite sigma is rejected")
{
    CHECK_THROWS_AS(NoiseSource(-1.0, 0), InvalidInput);
    CHECK_THROWS_AS(NoiseSource(NAN, 0), InvalidInput);
}
