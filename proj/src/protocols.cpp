#include "squidemu/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "squidemu/error.hpp"
#include "squidemu/kernels.hpp"

namespace squidemu {

namespace {

void require_grid(std::span<const Amperes> grid, const char* what)
{
    if (grid.empty()) throw InvalidInput(std::string(what) + " grid is empty");
    for (const double v : grid) require_finite(v, what);
}

void require_pulses(std::uint32_t n)
{
    if (n == 0) throw InvalidInput("need at least one pulse per point");
}

std::vector<std::uint32_t> pulse_counts_at(const EmulatorConfig& cfg, std::span<const Amperes> currents,
                                           Amperes i_dc, std::uint32_t n_pulses, std::uint64_t seed)
{
    cfg.validate();
    require_grid(currents, "i_sq");
    require_pulses(n_pulses);
    const Volts v_th = threshold_mean(cfg, i_dc);
    std::vector<PulsePoint> points;
    points.reserve(currents.size());
    for (const Amperes i : currents) points.push_back({i, v_th});
    return omp::pulse_counts(cfg, points, n_pulses, NoiseSource(cfg.noise_sigma, seed), OpId::Pulse);
}

}  // namespace

void SweepPlan::validate() const
{
    if (currents.empty()) throw InvalidInput("sweep plan has no currents");
    for (const double v : currents) require_finite(v, "sweep current");
    require_finite(i_dc, "i_dc");
    if (n_avg == 0) throw InvalidInput("n_avg must be >= 1");
}

SweepPlan SweepPlan::triangle_ramp(Amperes i_lo, Amperes i_hi, std::uint32_t n_steps,
                                   std::uint32_t n_avg, std::uint64_t seed, Amperes i_dc)
{
    require_finite(i_lo, "ramp start");
    require_finite(i_hi, "ramp maximum");
    if (n_steps == 0) throw InvalidInput("ramp needs at least one step");
    const double step = (i_hi - i_lo) / static_cast<double>(n_steps);
    SweepPlan plan;
    plan.i_dc = i_dc;
    plan.n_avg = n_avg;
    plan.seed = seed;
    plan.currents.reserve(2 * n_steps + 1);
    for (std::uint32_t k = 0; k <= n_steps; ++k) plan.currents.push_back(i_lo + k * step);
    for (std::uint32_t k = n_steps; k-- > 0;) plan.currents.push_back(i_lo + k * step);
    return plan;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points)
{
    require_finite(lo, "grid start");
    require_finite(hi, "grid end");
    if (points == 0) throw InvalidInput("grid needs at least one point");
    std::vector<double> grid(points, lo);
    if (points == 1) return grid;
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) grid[k] = lo + static_cast<double>(k) * step;
    return grid;
}

std::vector<Amperes> ModulationMap::contour(double level) const
{
    std::vector<Amperes> out(i_dc.size(), std::nan(""));
    for (std::size_t a = 0; a < i_dc.size(); ++a) {
        for (std::size_t b = 0; b < i_sq.size(); ++b) {
            if (at(a, b) >= level) {
                out[a] = i_sq[b];
                break;
            }
        }
    }
    return out;
}

PulseOutcome pulse_trial(const EmulatorConfig& cfg, Amperes i_sq, Amperes i_dc, Volts v_n)
{
    const StepResult r = step(DeviceState{}, cfg, i_sq, i_dc, v_n);
    return {r.state.phase == Phase::Resistive, r.v_sq};
}

SCurve s_curve(const EmulatorConfig& cfg, std::span<const Amperes> currents, Amperes i_dc,
               std::uint32_t n_pulses, std::uint64_t seed)
{
    const auto counts = pulse_counts_at(cfg, currents, i_dc, n_pulses, seed);
    SCurve out;
    out.currents.assign(currents.begin(), currents.end());
    out.n_pulses = n_pulses;
    out.p_sw.reserve(counts.size());
    for (const auto c : counts) out.p_sw.push_back(static_cast<double>(c) / n_pulses);
    return out;
}

SweepRecord pulsed_iv(const EmulatorConfig& cfg, std::span<const Amperes> currents, Amperes i_dc,
                      std::uint32_t n_pulses, std::uint64_t seed)
{
    const auto counts = pulse_counts_at(cfg, currents, i_dc, n_pulses, seed);
    SweepRecord out;
    out.currents.assign(currents.begin(), currents.end());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double p = static_cast<double>(counts[k]) / n_pulses;
        out.fraction.push_back(p);
        out.mean_v.push_back(p * currents[k] * cfg.r_normal);
    }
    return out;
}

SweepRecord dc_iv(const SweepPlan& plan, const EmulatorConfig& cfg)
{
    cfg.validate();
    plan.validate();

    std::map<double, RampVisit> seen;
    std::vector<RampVisit> visits;
    visits.reserve(plan.currents.size());
    for (const double i : plan.currents) {
        const auto [it, inserted] = seen.try_emplace(i, RampVisit{static_cast<std::uint32_t>(seen.size()), 0});
        if (!inserted) ++it->second.visit;
        visits.push_back(it->second);
    }

    const auto counts = omp::ramp_counts(cfg, plan.currents, visits, threshold_mean(cfg, plan.i_dc), plan.n_avg,
                                         NoiseSource(cfg.noise_sigma, plan.seed), OpId::DcIv);
    SweepRecord out;
    out.currents = plan.currents;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double f = static_cast<double>(counts[k]) / plan.n_avg;
        out.fraction.push_back(f);
        out.mean_v.push_back(f * plan.currents[k] * cfg.r_normal);
    }
    return out;
}

Volts branch_gap(const SweepRecord& record)
{
    std::map<double, std::pair<Volts, Volts>> range;
    for (std::size_t k = 0; k < record.currents.size(); ++k) {
        const Volts v = record.mean_v[k];
        const auto [it, inserted] = range.try_emplace(record.currents[k], v, v);
        if (!inserted) {
            it->second.first = std::min(it->second.first, v);
            it->second.second = std::max(it->second.second, v);
        }
    }
    Volts gap = 0.0;
    for (const auto& [i, mm] : range) gap = std::max(gap, mm.second - mm.first);
    return gap;
}

Amperes find_isw(const EmulatorConfig& cfg, Amperes i_dc, const FindIswOptions& opt)
{
    cfg.validate();
    require_finite(i_dc, "i_dc");
    if (!(opt.target > 0.0 && opt.target < 1.0)) throw InvalidInput("target p_sw must be in (0, 1)");
    if (!(opt.tolerance > 0.0)) throw InvalidInput("tolerance must be > 0");
    require_pulses(opt.n_pulses);

    const Volts v_th = threshold_mean(cfg, i_dc);
    const NoiseSource noise(cfg.noise_sigma, opt.seed);
    std::uint64_t evaluation = 0;
    auto estimate = [&](Amperes i) {
        const PulsePoint pt{i, v_th};
        const auto counts = omp::pulse_counts(cfg, std::span(&pt, 1), opt.n_pulses, noise,
                                              OpId::FindIsw, evaluation++);
        return static_cast<double>(counts[0]) / opt.n_pulses;
    };

    Amperes lo = opt.i_lo;
    Amperes hi = opt.i_hi.value_or(2.0 * switching_current(cfg, v_th) + 10.0 * cfg.noise_sigma / cfg.r_in);
    require_finite(lo, "bracket low");
    require_finite(hi, "bracket high");
    if (!(hi > lo)) throw BracketFailure("empty current bracket");
    if (!(estimate(lo) < opt.target)) throw BracketFailure("p_sw already at target at the low bracket");
    if (!(estimate(hi) >= opt.target)) throw BracketFailure("p_sw never reaches target below the high bracket");

    for (std::uint32_t it = 0; hi - lo > opt.tolerance && it < opt.max_iter; ++it) {
        const Amperes mid = 0.5 * (lo + hi);
        if (estimate(mid) < opt.target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

ModulationMap modulation_map(const EmulatorConfig& cfg, std::span<const Amperes> i_dc_grid,
                             std::span<const Amperes> i_sq_grid, std::uint32_t n_pulses,
                             std::uint64_t seed)
{
    cfg.validate();
    require_grid(i_dc_grid, "i_dc");
    require_grid(i_sq_grid, "i_sq");
    require_pulses(n_pulses);

    std::vector<PulsePoint> cells;
    cells.reserve(i_dc_grid.size() * i_sq_grid.size());
    for (const Amperes i_dc : i_dc_grid) {
        const Volts v_th = threshold_mean(cfg, i_dc);
        for (const Amperes i_sq : i_sq_grid) cells.push_back({i_sq, v_th});
    }
    const auto counts = omp::pulse_counts(cfg, cells, n_pulses, NoiseSource(cfg.noise_sigma, seed),
                                          OpId::ModulationMap);
    ModulationMap out;
    out.i_dc.assign(i_dc_grid.begin(), i_dc_grid.end());
    out.i_sq.assign(i_sq_grid.begin(), i_sq_grid.end());
    out.n_pulses = n_pulses;
    out.p_sw.reserve(counts.size());
    for (const auto c : counts) out.p_sw.push_back(static_cast<double>(c) / n_pulses);
    return out;
}

Volts closure_tolerance(const EmulatorConfig& cfg, const CalibrationOptions& opt)
{
    return opt.closure_fraction * switching_current(cfg, cfg.zero_flux_threshold()) * cfg.r_normal;
}

NoiseLevels calibrate_noise_levels(const EmulatorConfig& cfg, const CalibrationOptions& opt)
{
    cfg.validate();
    opt.ramp.validate();
    if (!(opt.sigma_max > 0.0) || !(opt.resolution > 0.0)) {
        throw InvalidInput("calibration needs positive sigma_max and resolution");
    }
    if (cfg.r_normal == 0.0) return {};

    const Volts tol = closure_tolerance(cfg, opt);
    auto gap_at = [&](Volts sigma) {
        EmulatorConfig c = cfg;
        c.noise_sigma = sigma;
        return branch_gap(dc_iv(opt.ramp, c));
    };

    if (gap_at(0.0) < tol) return {};
    if (!(gap_at(opt.sigma_max) < tol)) {
        throw CalibrationFailure("hysteresis still open at sigma_max");
    }

    Volts lo = 0.0;
    Volts hi = opt.sigma_max;
    std::uint32_t it = 0;
    while (hi - lo > opt.resolution) {
        if (it++ >= opt.max_iter) throw CalibrationFailure("noise calibration did not converge");
        const Volts mid = 0.5 * (lo + hi);
        if (gap_at(mid) < tol) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {hi, hi / 2.0};
}

void FeedbackPlan::validate() const
{
    require_finite(i_sq_probe, "probe current");
    require_finite(i_dc_start, "start bias");
    require_finite(gain, "gain");
    require_finite(branch_lo, "branch low");
    require_finite(branch_hi, "branch high");
    if (gain < 0.0) throw InvalidInput("feedback gain must be >= 0");
    if (branch_sign != 1 && branch_sign != -1) throw InvalidInput("branch_sign must be +1 or -1");
    if (!(branch_lo < branch_hi)) throw InvalidInput("empty branch interval");
    if (i_dc_start < branch_lo || i_dc_start > branch_hi) {
        throw InvalidInput("start bias outside the branch interval");
    }
    require_pulses(n_pulses);
    if (disturbance.empty()) throw InvalidInput("feedback needs at least one iteration");
    for (const double d : disturbance) require_finite(d, "disturbance");
}

FeedbackTrace flux_feedback(const EmulatorConfig& cfg, const FeedbackPlan& plan)
{
    cfg.validate();
    plan.validate();

    const NoiseSource noise(cfg.noise_sigma, plan.seed);
    FeedbackTrace trace;
    trace.steps.reserve(plan.disturbance.size());
    Amperes i_dc = plan.i_dc_start;
    for (std::uint32_t it = 0; it < plan.disturbance.size(); ++it) {
        if (i_dc < plan.branch_lo || i_dc > plan.branch_hi) {
            trace.branch_escape = "I_DC left [" + std::to_string(plan.branch_lo) + ", " +
                                  std::to_string(plan.branch_hi) + "] A at iteration " + std::to_string(it);
            break;
        }
        const Volts d = plan.disturbance[it];
        const PulsePoint pt{plan.i_sq_probe, threshold_mean(cfg, i_dc) - d};
        const auto counts =
            omp::pulse_counts(cfg, std::span(&pt, 1), plan.n_pulses, noise, OpId::Feedback, it);
        const double p_hat = static_cast<double>(counts[0]) / plan.n_pulses;
        trace.steps.push_back({it, p_hat, i_dc, d});
        i_dc -= plan.gain * (p_hat - 0.5) * plan.branch_sign;
    }
    return trace;
}

std::vector<Volts> step_disturbance(std::uint32_t n_iters, std::uint32_t at, Volts amplitude)
{
    std::vector<Volts> d(n_iters, 0.0);
    for (std::uint32_t k = at; k < n_iters; ++k) d[k] = amplitude;
    return d;
}

FeedbackPlan rising_branch_plan(const EmulatorConfig& cfg, std::uint32_t n_iters, std::uint64_t seed)
{
    const TriConfig& t = cfg.tri_cfg;
    const Amperes code_width = t.v_fullscale / (256.0 * t.g_dc);
    FeedbackPlan plan;
    plan.branch_lo = 0.0;
    plan.branch_hi = t.idc_period() / 2.0;
    // Middle of the 64-code rising branch, half a code off the boundary.
    plan.i_dc_start = 32.5 * code_width;
    plan.i_sq_probe = switching_current(cfg, threshold_mean(cfg, plan.i_dc_start));
    plan.branch_sign = +1;
    plan.seed = seed;
    plan.disturbance.assign(n_iters, 0.0);
    return plan;
}

}  // namespace squidemu
