#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "squidemu/device.hpp"
#include "squidemu/units.hpp"

namespace squidemu {

inline constexpr std::uint32_t kDefaultPulses = 1000;

/// Ordered list of bias currents walked by one DC IV repetition.
struct SweepPlan {
    std::vector<Amperes> currents;
    Amperes i_dc = 0.0;
    std::uint32_t n_avg = 1;
    std::uint64_t seed = 0;

    void validate() const;

    /// i_lo -> i_hi -> i_lo in n_steps equal steps each way. Up and down
    /// points at the same level are bitwise identical currents.
    static SweepPlan triangle_ramp(Amperes i_lo, Amperes i_hi, std::uint32_t n_steps,
                                   std::uint32_t n_avg, std::uint64_t seed, Amperes i_dc = 0.0);
};

/// Evenly spaced grid, imin + k (imax - imin) / (points - 1). points == 1
/// yields {imin}.
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

struct SweepRecord {
    std::vector<Amperes> currents;
    std::vector<Volts> mean_v;
    std::vector<double> fraction;  // fraction of trials in the resistive state
};

struct SCurve {
    std::vector<Amperes> currents;
    std::vector<double> p_sw;
    std::uint32_t n_pulses = 0;
};

struct ModulationMap {
    std::vector<Amperes> i_dc;
    std::vector<Amperes> i_sq;
    std::vector<double> p_sw;  // row-major, row = i_dc index
    std::uint32_t n_pulses = 0;

    double at(std::size_t dc_index, std::size_t sq_index) const
    {
        return p_sw[dc_index * i_sq.size() + sq_index];
    }

    /// Per i_dc row: the first i_sq grid value with p_sw >= level, or NaN if
    /// the row never reaches it.
    std::vector<Amperes> contour(double level = 0.5) const;
};

struct PulseOutcome {
    bool switched = false;
    Volts v_sq = 0.0;
};

/// A single pulse on a freshly reset device with one threshold noise draw.
PulseOutcome pulse_trial(const EmulatorConfig& cfg, Amperes i_sq, Amperes i_dc, Volts v_n);

SCurve s_curve(const EmulatorConfig& cfg, std::span<const Amperes> currents, Amperes i_dc,
               std::uint32_t n_pulses, std::uint64_t seed);

/// Pulsed IV. Uses the same pulse substreams as s_curve, so for equal
/// arguments mean_v[k] == p_sw[k] * i[k] * r_normal exactly.
SweepRecord pulsed_iv(const EmulatorConfig& cfg, std::span<const Amperes> currents, Amperes i_dc,
                      std::uint32_t n_pulses, std::uint64_t seed);

/// Averaged DC IV with hysteresis carried across the ramp.
///
/// Every point takes one fresh threshold draw. Revisits of a bias level
/// reuse draws from other repetitions (see ramp_stream_key), so each
/// repetition is an exact sample of the sample-and-hold model while the up
/// and down averages share their draws and their difference carries far
/// less sampling noise.
SweepRecord dc_iv(const SweepPlan& plan, const EmulatorConfig& cfg);

/// Largest |mean_v| difference between two points of the record that share a
/// current value. Zero if no current repeats.
Volts branch_gap(const SweepRecord& record);

struct FindIswOptions {
    double target = 0.5;
    std::uint32_t n_pulses = kDefaultPulses;
    Amperes tolerance = 0.05e-6;
    Amperes i_lo = 0.0;
    std::optional<Amperes> i_hi;  // default: 2 x zero-flux switching current + 10 sigma
    std::uint32_t max_iter = 200;
    std::uint64_t seed = 0;
};

/// Bisection for the current at which the estimated p_sw crosses target.
Amperes find_isw(const EmulatorConfig& cfg, Amperes i_dc, const FindIswOptions& opt = {});

ModulationMap modulation_map(const EmulatorConfig& cfg, std::span<const Amperes> i_dc_grid,
                             std::span<const Amperes> i_sq_grid, std::uint32_t n_pulses,
                             std::uint64_t seed);

struct CalibrationOptions {
    SweepPlan ramp = SweepPlan::triangle_ramp(0.0, 120e-6, 120, 5000, 1);
    // Closure tolerance as a fraction of I_sw(0) * r_normal in mean voltage.
    double closure_fraction = 0.02;
    Volts sigma_max = 0.2;
    Volts resolution = 1e-4;
    std::uint32_t max_iter = 60;
};

struct NoiseLevels {
    Volts sigma_large = 0.0;
    Volts sigma_medium = 0.0;
};

/// Absolute closure tolerance in volts implied by opt for cfg.
Volts closure_tolerance(const EmulatorConfig& cfg, const CalibrationOptions& opt);

/// Smallest sigma whose averaged DC IV branches agree within the closure
/// tolerance (bisection on a fixed seed); medium is half of large.
NoiseLevels calibrate_noise_levels(const EmulatorConfig& cfg, const CalibrationOptions& opt = {});

struct FeedbackPlan {
    Amperes i_sq_probe = 0.0;
    Amperes i_dc_start = 0.0;
    double gain = 8e-5;     // amperes of I_DC per unit of (p_hat - 0.5)
    int branch_sign = +1;   // +1 where p_sw increases with I_DC, -1 otherwise
    Amperes branch_lo = 0.0;
    Amperes branch_hi = 0.0;
    std::uint32_t n_pulses = kDefaultPulses;
    std::uint64_t seed = 0;
    // Extra volts added to the Tri output at each iteration; its length is
    // the iteration count.
    std::vector<Volts> disturbance;

    void validate() const;
};

struct FeedbackStep {
    std::uint32_t iteration = 0;
    double p_hat = 0.0;
    Amperes i_dc = 0.0;  // bias applied while measuring p_hat
    Volts disturbance = 0.0;
};

struct FeedbackTrace {
    std::vector<FeedbackStep> steps;
    // Set when the controller pushed I_DC off the branch; the trace stops at
    // the last in-branch iteration.
    std::optional<std::string> branch_escape;
};

/// Proportional working-point lock at p_sw = 0.5.
FeedbackTrace flux_feedback(const EmulatorConfig& cfg, const FeedbackPlan& plan);

/// Disturbance series: 0 before `at`, `amplitude` from `at` on.
std::vector<Volts> step_disturbance(std::uint32_t n_iters, std::uint32_t at, Volts amplitude);

/// Working point on the rising branch of the first period: start at the
/// middle of the branch and probe with the pulse amplitude whose noise-free
/// p_sw is 0.5 there.
FeedbackPlan rising_branch_plan(const EmulatorConfig& cfg, std::uint32_t n_iters, std::uint64_t seed);

}  // namespace squidemu
