// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <boost/asio.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "squidemu/cli.hpp"
#include "squidemu/protocols.hpp"
#include "squidemu/reference_model.hpp"
#include "squidemu/server.hpp"
#include "squidemu/tri_converter.hpp"

using namespace squidemu;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<void(Verdict&)>& body)
{
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(v);
    } catch (const std::exception& e) {
        v.ok = false;
        v.note(std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed >= budget_s) {
        v.ok = false;
        v.note("runtime over budget");
    }
    if (!v.ok) ++failures;
    std::printf("%s %2d %-28s %.3f s (budget %g s)  %s\n", v.ok ? "PASS" : "FAIL", id, name, elapsed, budget_s,
                v.detail.c_str());
    std::fflush(stdout);
}

EmulatorConfig with_sigma(Volts sigma)
{
    EmulatorConfig cfg;
    cfg.noise_sigma = sigma;
    return cfg;
}

// First grid value the noise-free comparator switches or retraps at, worked
// out from the grid values so ties round the same way as the device.
std::optional<Amperes> first_above(const std::vector<Amperes>& g, double r, Volts v_th)
{
    for (const Amperes i : g) {
        if (i * r > v_th) return i;
    }
    return std::nullopt;
}

std::optional<Amperes> first_at_or_below_descending(const std::vector<Amperes>& g, double r, Volts v_th)
{
    for (auto it = g.rbegin(); it != g.rend(); ++it) {
        if (!(*it * r > v_th)) return *it;
    }
    return std::nullopt;
}

NoiseLevels levels;  // set by criterion 3, reused by criterion 5

std::string run(std::vector<std::string> args, int* code = nullptr)
{
    args.insert(args.begin(), "squidemu");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code) *code = rc;
    return out.str();
}

class LineClient {
public:
    explicit LineClient(unsigned short port) : socket_(io_)
    {
        socket_.connect({boost::asio::ip::make_address("127.0.0.1"), port});
    }
    std::string ask(const std::string& line)
    {
        boost::asio::write(socket_, boost::asio::buffer(line + "\n"));
        const std::size_t n = boost::asio::read_until(socket_, buf_, '\n');
        std::string r(boost::asio::buffers_begin(buf_.data()), boost::asio::buffers_begin(buf_.data()) + n - 1);
        buf_.consume(n);
        return r;
    }

private:
    boost::asio::io_context io_;
    boost::asio::ip::tcp::socket socket_;
    boost::asio::streambuf buf_;
};

}  // namespace

int main()
{
    criterion(1, "retrapping arithmetic", 1e-3, [](Verdict& v) {
        const EmulatorConfig cfg;
        const Amperes ir = retrap_current(cfg, 0.090);
        v.note("I_r = " + fmt("%.4f", ir * 1e6) + " uA");
        v.require(std::fabs(ir - 73.47e-6) < 0.01e-6, "I_r within 0.01 uA of 73.47 uA");
        v.require(std::round(ir * 1e6) == 73.0, "rounds to 73 uA");
    });

    criterion(2, "zero-noise IV", 1.0, [](Verdict& v) {
        const EmulatorConfig cfg;
        const auto grid = linear_grid(0.0, 120e-6, 121);
        const SweepRecord dc = dc_iv(SweepPlan::triangle_ramp(0.0, 120e-6, 120, 100, 1), cfg);

        std::optional<Amperes> up_switch, down_retrap;
        for (std::size_t k = 1; k <= 120; ++k) {
            if (!up_switch && dc.fraction[k] == 1.0 && dc.fraction[k - 1] == 0.0) up_switch = dc.currents[k];
        }
        for (std::size_t k = 121; k < dc.currents.size(); ++k) {
            if (!down_retrap && dc.fraction[k] == 0.0 && dc.fraction[k - 1] == 1.0) down_retrap = dc.currents[k];
        }
        const auto want_up = first_above(grid, cfg.r_in, 0.090);
        const auto want_down = first_at_or_below_descending(grid, cfg.r_in + cfg.r_normal, 0.090);
        v.require(up_switch && want_up && *up_switch == *want_up, "up branch switches at the first point above 90 uA");
        v.require(down_retrap && want_down && *down_retrap == *want_down,
                  "down branch retraps at the first point below 73.47 uA");
        v.require(*want_up > 90e-6 && *want_up - 90e-6 <= 1e-6 + 1e-12, "switch point is within one step above 90 uA");
        v.require(*want_down < retrap_current(cfg, 0.090), "retrap point is below I_r");
        for (std::size_t k = 0; k < dc.fraction.size(); ++k) {
            if (dc.fraction[k] != 0.0 && dc.fraction[k] != 1.0) {
                v.require(false, "every repetition identical without noise");
                break;
            }
        }

        const SweepRecord pulsed = pulsed_iv(cfg, grid, 0.0, 100, 1);
        int edges = 0;
        std::optional<Amperes> pulsed_switch;
        for (std::size_t k = 1; k < grid.size(); ++k) {
            if (pulsed.fraction[k] != pulsed.fraction[k - 1]) {
                ++edges;
                pulsed_switch = grid[k];
            }
        }
        v.require(edges == 1 && pulsed_switch == up_switch, "pulsed IV switches once, at the DC switching point");
        if (up_switch && down_retrap) {
            v.note("up " + fmt("%.0f", *up_switch * 1e6) + " uA, down " + fmt("%.0f", *down_retrap * 1e6) +
                   " uA, pulsed " + fmt("%.0f", pulsed_switch.value_or(0) * 1e6) + " uA");
        }
    });

    criterion(3, "hysteresis closure", 60.0, [](Verdict& v) {
        const EmulatorConfig cfg;
        const CalibrationOptions opt;
        levels = calibrate_noise_levels(cfg, opt);
        const Volts tol = closure_tolerance(cfg, opt);
        v.note("sigma_large = " + fmt("%.2f", levels.sigma_large * 1e3) + " mV");
        v.require(std::fabs(tol - 0.02 * 90e-6 * 225.0) < 1e-12, "tolerance is 2% of 90 uA x 225 Ohm");
        v.require(levels.sigma_large > 0.0, "calibration found a closing sigma");

        const EmulatorConfig noisy = with_sigma(levels.sigma_large);
        const Volts gap = branch_gap(dc_iv(opt.ramp, noisy));
        v.note("gap " + fmt("%.3f", gap * 1e3) + " mV at N=5000, tol " + fmt("%.3f", tol * 1e3) + " mV");
        v.require(opt.ramp.n_avg == 5000, "N = 5000 repetitions");
        v.require(gap < tol, "measured gap below tolerance");

        // Exact expectation of both branches under the sample-and-hold model.
        const auto expect = oracle::expected_ramp_fraction(noisy, opt.ramp.currents, noisy.zero_flux_threshold());
        const std::size_t top = 120;
        Volts expected_gap = 0.0;
        for (std::size_t k = 0; k <= top; ++k) {
            const std::size_t d = 2 * top - k;
            const Amperes i = opt.ramp.currents[k];
            expected_gap = std::max(expected_gap, std::fabs(expect[k] - expect[d]) * i * noisy.r_normal);
        }
        v.note("expected gap " + fmt("%.3f", expected_gap * 1e3) + " mV");
        v.require(expected_gap < tol, "expected gap below tolerance");

        const Volts open_gap = branch_gap(dc_iv(opt.ramp, with_sigma(0.0)));
        v.require(open_gap > 10 * tol, "hysteresis is open without noise");
    });

    criterion(4, "S-curve law", 30.0, [](Verdict& v) {
        const EmulatorConfig cfg = with_sigma(5e-3);
        const std::uint32_t n = 10000;
        const auto grid = linear_grid(0.0, 120e-6, 121);
        const SCurve sc = s_curve(cfg, grid, 0.0, n, 4);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            worst = std::max(worst, std::fabs(sc.p_sw[k] - oracle::expected_p_sw(cfg, grid[k], 0.090)));
        }
        const double bound = 4 * std::sqrt(0.25 / n);
        v.note("max |p - CDF| = " + fmt("%.4f", worst));
        v.require(worst < bound, "max deviation below 4 sqrt(0.25/n)");

        auto crossing = [&](const SCurve& s) {
            for (std::size_t k = 0; k < s.p_sw.size(); ++k) {
                if (s.p_sw[k] >= 0.5) return s.currents[k];
            }
            return s.currents.back() + 1.0;
        };
        const Amperes sharp = crossing(s_curve(with_sigma(0.0), grid, 0.0, 1, 4));
        const Amperes noisy = crossing(sc);
        v.note("50% crossing " + fmt("%.0f", noisy * 1e6) + " uA vs " + fmt("%.0f", sharp * 1e6) + " uA");
        v.require(noisy <= sharp, "noise does not raise the 50% crossing");
    });

    criterion(5, "threshold histograms", 5.0, [](Verdict& v) {
        const EmulatorConfig base;
        const std::size_t n = 100000;
        v.require(levels.sigma_large > 0.0, "sigma_large available");
        for (const Volts sigma : {0.0, levels.sigma_medium, levels.sigma_large}) {
            const VthSamples s = sample_vth_histogram(with_sigma(sigma), 0.0, n, NoiseSource(sigma, 5));
            const double mean_tol = 3 * sigma / std::sqrt(static_cast<double>(n));
            const std::string tag = fmt("sigma %.2f mV", sigma * 1e3);
            v.require(s.samples.size() == n, tag + " sample count");
            if (sigma == 0.0) {
                v.require(s.mean == base.v_th0 && s.stddev == 0.0, tag + " constant threshold");
            } else {
                v.require(std::fabs(s.mean - base.v_th0) <= mean_tol, tag + " mean within 3 sigma/sqrt(n)");
                v.require(std::fabs(s.stddev - sigma) <= 0.03 * sigma, tag + " std within 3%");
            }
            v.note(tag + ": mean " + fmt("%.4f", s.mean * 1e3) + " mV, std " + fmt("%.4f", s.stddev * 1e3) + " mV");
        }
        v.require(levels.sigma_medium == levels.sigma_large / 2, "medium is half of large");
    });

    criterion(6, "modulation map", 60.0, [](Verdict& v) {
        const EmulatorConfig cfg;
        const Amperes code = cfg.tri_cfg.v_fullscale / 256.0 / cfg.tri_cfg.g_dc;
        const auto sq = linear_grid(0.0, 120e-6, 1201);  // 0.1 uA steps

        // Coarse map over +-2 mA in 25 uA steps.
        const auto dc = linear_grid(-2e-3, 2e-3, 161);
        const auto c = modulation_map(cfg, dc, sq, 1, 6).contour();
        bool periodic = true;
        for (std::size_t k = 0; k + 40 < c.size(); ++k) {
            // Skip biases that sit exactly on an ADC code edge.
            const double codes = std::fabs(dc[k]) / code;
            if (std::fabs(codes - std::round(codes)) < 1e-6) continue;
            periodic = periodic && c[k] == c[k + 40];
        }
        v.require(periodic, "contour repeats every 1.0 mA");
        int minima = 0;
        for (std::size_t k = 1; k + 1 < c.size();) {
            std::size_t j = k;
            while (j + 1 < c.size() && c[j + 1] == c[k]) ++j;  // plateau
            if (j + 1 < c.size() && c[k] < c[k - 1] && c[k] < c[j + 1]) ++minima;
            k = j + 1;
        }
        v.require(minima == 4, "four cycles over +-2 mA");
        const Amperes lowest = *std::min_element(c.begin(), c.end());
        v.require(lowest > 0.0 && std::fabs(lowest - 50e-6) <= 0.1e-6 + 1e-12, "minimum contour 50 uA");

        // One period at 1 uA bias resolution: count the distinct levels.
        const auto fine = linear_grid(0.0, 1e-3, 1001);
        const auto cf = modulation_map(cfg, fine, sq, 1, 6).contour();
        const std::set<double> distinct(cf.begin(), cf.end());
        v.require(distinct.size() <= 64 && distinct.size() > 1, "at most 64 contour levels per period");

        // With noise the contour still stays clear of zero.
        const auto noisy = modulation_map(with_sigma(5e-3), linear_grid(0.4e-3, 0.6e-3, 9), sq, 200, 6).contour();
        const Amperes noisy_low = *std::min_element(noisy.begin(), noisy.end());
        v.require(noisy_low > 30e-6, "noisy minimum stays well above zero");

        v.note(std::to_string(minima) + " minima, min " + fmt("%.1f", lowest * 1e6) + " uA, " +
               std::to_string(distinct.size()) + " levels/period, noisy min " + fmt("%.1f", noisy_low * 1e6) + " uA");
    });

    criterion(7, "tri-converter oracle", 1e-3, [](Verdict& v) {
        const TriConfig cfg;
        unsigned prev = 0;
        int mismatches = 0, jumps = 0;
        for (unsigned k = 0; k < 256; ++k) {
            const Volts mid = (k + 0.5) * cfg.v_fullscale / 256.0;
            const AdcCode code = digitize(mid, cfg);
            if (code.code() != oracle::adc_code_by_search(mid, cfg.v_fullscale)) ++mismatches;
            const unsigned r = remap(AdcCode(static_cast<std::uint8_t>(k)));
            if (r != oracle::remap_by_gates(k)) ++mismatches;
            if (tri(mid / cfg.g_dc, cfg) != oracle::tri_by_enumeration(mid / cfg.g_dc, cfg)) ++mismatches;
            if (k > 0 && (r > prev ? r - prev : prev - r) > 1) ++jumps;
            prev = r;
        }
        v.require(mismatches == 0, "all 256 codes match the enumeration");
        v.require(jumps == 0, "neighbouring codes differ by at most one level");
        v.note(std::to_string(mismatches) + " mismatches, " + std::to_string(jumps) + " jumps");
    });

    criterion(8, "Taylor cosine", 10e-3, [](Verdict& v) {
        double worst = 0.0;
        const int n = 10000;
        for (int k = 0; k < n; ++k) {
            const double x = -std::numbers::pi + 2 * std::numbers::pi * k / (n - 1);
            worst = std::max(worst, std::fabs(taylor_cos(x, 9) - std::cos(x)));
        }
        v.note("max error " + fmt("%.3g", worst));
        v.require(worst < 2e-6, "max error below 2e-6");
    });

    criterion(9, "flux feedback", 30.0, [](Verdict& v) {
        const EmulatorConfig cfg = with_sigma(5e-3);
        const Amperes code = cfg.tri_cfg.v_fullscale / 256.0 / cfg.tri_cfg.g_dc;
        FeedbackPlan plan = rising_branch_plan(cfg, 300, 1);
        plan.gain = 8e-5;
        plan.n_pulses = 1000;
        plan.disturbance = step_disturbance(300, 100, 0.010);
        const FeedbackTrace t = flux_feedback(cfg, plan);
        v.require(!t.branch_escape && t.steps.size() == 300, "loop stays on the branch");
        if (t.steps.size() != 300) return;

        auto mean = [&](std::uint32_t a, std::uint32_t b, auto field) {
            double s = 0.0;
            for (std::uint32_t k = a; k < b; ++k) s += field(t.steps[k]);
            return s / (b - a);
        };
        const double p = mean(200, 300, [](const FeedbackStep& s) { return s.p_hat; });
        const auto idc = [](const FeedbackStep& s) { return s.i_dc; };
        const Amperes shift = mean(200, 300, idc) - mean(50, 100, idc);
        // Tri inverse of 10 mV: (10 / 40) x 63 levels, one code of I_DC per level.
        const Amperes expected = -(0.010 / tri_step(cfg.tri_cfg)) * code;
        v.note("p_hat " + fmt("%.3f", p) + ", shift " + fmt("%.2f", shift * 1e6) + " uA vs " +
               fmt("%.2f", expected * 1e6) + " uA");
        v.require(std::fabs(p - 0.5) <= 0.05, "p_hat returns to 0.5 +- 0.05");
        v.require(std::fabs(shift - expected) <= code, "shift within one DAC step of the Tri inverse");

        FeedbackPlan off = plan;
        off.gain = 0.0;
        const FeedbackTrace still = flux_feedback(cfg, off);
        bool constant = still.steps.size() == 300;
        for (const auto& s : still.steps) constant = constant && s.i_dc == off.i_dc_start;
        v.require(constant, "zero gain leaves I_DC constant");
    });

    criterion(10, "determinism and protocol", 60.0, [](Verdict& v) {
        const std::vector<std::vector<std::string>> jobs = {
            {"s-curve", "--sigma", "0.005", "--pulses", "500"},
            {"pulsed-iv", "--sigma", "0.005", "--pulses", "500"},
            {"dc-iv", "--sigma", "0.01", "--reps", "200"},
            {"mod-map", "--sigma", "0.005", "--pulses", "50", "--idc-points", "21", "--points", "61"},
            {"vth-hist", "--sigma", "0.005", "--samples", "10000"},
            {"feedback", "--sigma", "0.005", "--iters", "60", "--step-at", "30"},
        };
        for (auto job : jobs) {
            job.insert(job.end(), {"--seed", "77"});
            int a_rc = -1, b_rc = -1;
            const std::string a = run(job, &a_rc);
            const std::string b = run(job, &b_rc);
            job.back() = "78";
            const std::string c = run(job);
            v.require(a_rc == 0 && b_rc == 0 && !a.empty() && a == b, job[0] + " byte-identical for equal seeds");
            v.require(a != c, job[0] + " differs for another seed");
        }

        InstrumentServer server("127.0.0.1", 0, [] { return InstrumentSession{}; });
        std::thread loop([&] { server.run(); });
        try {
            LineClient cl(server.port());
            const std::vector<std::pair<std::string, std::string>> keys = {
                {"RIN", "1500.25"},  {"RNORM", "300"},      {"VTH0", "0.095"}, {"VOFF", "-0.001"},
                {"SIGMA", "0.0042"}, {"MODDEPTH", "0.035"}, {"GDC", "2000"},   {"SEED", "123456789"},
            };
            for (const auto& [k, val] : keys) {
                v.require(cl.ask("SET " + k + " " + val) == "OK", "SET " + k);
                const std::string got = cl.ask("GET " + k);
                v.require(std::stod(got) == std::stod(val), "GET " + k + " returns the value set");
            }
            const std::vector<std::string> malformed = {
                "", "   ", "FOO", "SET", "SET RIN", "SET RIN abc", "SET NOPE 1", "GET", "GET NOPE",
                "PULSE", "PULSE x", "IDC", "SCURVE 1 2", "SET RIN -1", "SET RIN nan", "\xc3\x28", "\xff\xfe",
                "GET R\xe2\x82N", std::string("GET\0RIN", 7),
            };
            int errs = 0;
            for (const auto& line : malformed) {
                if (cl.ask(line).rfind("ERR ", 0) == 0) ++errs;
            }
            v.require(errs == static_cast<int>(malformed.size()), "every malformed line gets ERR");
            v.require(cl.ask("GET RIN") == "1500.25", "connection survives malformed input");
            v.note(std::to_string(jobs.size()) + " CSV kinds reproducible, " + std::to_string(keys.size()) +
                   " keys round-trip, " + std::to_string(errs) + "/" + std::to_string(malformed.size()) + " ERR");
        } catch (...) {
            server.stop();
            loop.join();
            throw;
        }
        server.stop();
        loop.join();
    });

    std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
