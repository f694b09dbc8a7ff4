#include "squidemu/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "squidemu/config_file.hpp"
#include "squidemu/csv.hpp"
#include "squidemu/error.hpp"
#include "squidemu/protocols.hpp"
#include "squidemu/server.hpp"

namespace squidemu {

namespace {

// Flags shared by every measurement subcommand. Unset flags fall back to the
// config file, then to built-in defaults.
struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> sigma;
    std::optional<double> idc;
    std::optional<double> imin;
    std::optional<double> imax;
    std::optional<std::uint32_t> points;
    std::optional<std::uint32_t> pulses;

    void attach(CLI::App& cmd)
    {
        cmd.add_option("--config", config, "key = value experiment file");
        cmd.add_option("--out", out, "CSV output path (default: stdout)");
        cmd.add_option("--seed", seed, "RNG seed");
        cmd.add_option("--sigma", sigma, "threshold noise sigma [V]");
        cmd.add_option("--idc", idc, "flux-bias current [A]");
        cmd.add_option("--imin", imin, "lowest pulse / bias current [A]");
        cmd.add_option("--imax", imax, "highest pulse / bias current [A]");
        cmd.add_option("--points", points, "number of current grid points");
        cmd.add_option("--pulses", pulses, "pulses per point (repetitions for dc-iv)");
    }

    ExperimentConfig resolve() const
    {
        ExperimentConfig c = config.empty() ? ExperimentConfig{} : load_config(config);
        if (seed) c.seed = *seed;
        if (sigma) c.emulator.noise_sigma = *sigma;
        if (idc) c.i_dc = *idc;
        if (imin) c.i_sq_min = *imin;
        if (imax) c.i_sq_max = *imax;
        if (points) c.i_sq_points = *points;
        if (pulses) {
            c.n_pulses = *pulses;
            c.n_avg = *pulses;
        }
        c.validate();
        return c;
    }

    std::vector<Amperes> i_sq_grid(const ExperimentConfig& c) const
    {
        return linear_grid(c.i_sq_min, c.i_sq_max, c.i_sq_points);
    }
};

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (path.empty()) return;
        file_.open(path, std::ios::binary | std::ios::trunc);
        if (!file_) throw std::runtime_error("cannot write " + path);
        stream_ = &file_;
    }
    std::ostream& stream() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Software DC-SQUID emulator: measurement protocols and instrument server", "squidemu"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* dc = app.add_subcommand("dc-iv", "averaged DC IV over an up/down current ramp");
    flags.attach(*dc);
    std::optional<std::uint32_t> reps;
    dc->add_option("--reps", reps, "ramp repetitions averaged (overrides --pulses)");

    auto* pulsed = app.add_subcommand("pulsed-iv", "pulsed IV, device reset before every pulse");
    flags.attach(*pulsed);

    auto* sc = app.add_subcommand("s-curve", "switching probability versus pulse amplitude");
    flags.attach(*sc);

    auto* mm = app.add_subcommand("mod-map", "switching probability over flux bias and pulse amplitude");
    flags.attach(*mm);
    std::optional<double> idc_min, idc_max;
    std::optional<std::uint32_t> idc_points;
    mm->add_option("--idc-min", idc_min, "lowest flux-bias current [A]");
    mm->add_option("--idc-max", idc_max, "highest flux-bias current [A]");
    mm->add_option("--idc-points", idc_points, "number of flux-bias grid points");

    auto* hist = app.add_subcommand("vth-hist", "histogram of the comparator threshold");
    flags.attach(*hist);
    std::optional<std::uint32_t> samples, bins;
    hist->add_option("--samples", samples, "number of threshold samples");
    hist->add_option("--bins", bins, "number of histogram bins");

    auto* fb = app.add_subcommand("feedback", "flux-feedback lock at p_sw = 0.5 under a step disturbance");
    flags.attach(*fb);
    std::optional<double> gain, step_v;
    std::optional<std::uint32_t> iters, step_at;
    fb->add_option("--gain", gain, "feedback gain [A per unit p_sw error]");
    fb->add_option("--iters", iters, "iterations");
    fb->add_option("--step-at", step_at, "iteration at which the disturbance steps");
    fb->add_option("--step", step_v, "disturbance added to the Tri output [V]");

    auto* cal = app.add_subcommand("calibrate-noise", "find the sigma that just closes the DC IV hysteresis");
    flags.attach(*cal);
    cal->add_option("--reps", reps, "ramp repetitions averaged (overrides --pulses)");
    std::optional<double> sigma_max, resolution;
    cal->add_option("--sigma-max", sigma_max, "upper end of the sigma search [V]");
    cal->add_option("--resolution", resolution, "bisection resolution [V]");

    auto* srv = app.add_subcommand("serve", "run the line-oriented TCP instrument server");
    std::string config_path, bind = "127.0.0.1";
    unsigned short port = 5025;
    std::optional<std::uint64_t> srv_seed;
    srv->add_option("--config", config_path, "key = value experiment file");
    srv->add_option("--bind", bind, "listen address");
    srv->add_option("--port", port, "listen port");
    srv->add_option("--seed", srv_seed, "session RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "squidemu: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (srv->parsed()) {
            ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
            const std::uint64_t seed = srv_seed.value_or(c.seed);
            InstrumentServer server(bind, port, [emu = c.emulator, seed] { return InstrumentSession(emu, seed); });
            err << "squidemu: listening on " << bind << ":" << server.port() << "\n";
            server.run(true);
            return kExitOk;
        }

        const ExperimentConfig c = flags.resolve();
        Output sink(flags.out, out);
        CsvWriter csv(sink.stream());

        if (dc->parsed()) {
            const std::uint32_t n = reps.value_or(c.n_avg);
            const SweepPlan plan =
                SweepPlan::triangle_ramp(c.i_sq_min, c.i_sq_max, c.i_sq_points - 1, n, c.seed, c.i_dc);
            const SweepRecord rec = dc_iv(plan, c.emulator);
            csv.header({"branch", "i_sq_A", "mean_v_V", "p_resistive"});
            const std::size_t top = c.i_sq_points - 1;
            for (std::size_t k = 0; k < rec.currents.size(); ++k) {
                csv.row(k <= top ? "up" : "down", {rec.currents[k], rec.mean_v[k], rec.fraction[k]});
            }
        } else if (pulsed->parsed()) {
            const SweepRecord rec = pulsed_iv(c.emulator, flags.i_sq_grid(c), c.i_dc, c.n_pulses, c.seed);
            csv.header({"i_sq_A", "mean_v_V", "p_sw"});
            for (std::size_t k = 0; k < rec.currents.size(); ++k) {
                csv.row({rec.currents[k], rec.mean_v[k], rec.fraction[k]});
            }
        } else if (sc->parsed()) {
            const SCurve s = s_curve(c.emulator, flags.i_sq_grid(c), c.i_dc, c.n_pulses, c.seed);
            csv.header({"i_sq_A", "p_sw"});
            for (std::size_t k = 0; k < s.currents.size(); ++k) csv.row({s.currents[k], s.p_sw[k]});
        } else if (mm->parsed()) {
            const auto dc_grid = linear_grid(idc_min.value_or(c.i_dc_min), idc_max.value_or(c.i_dc_max),
                                             idc_points.value_or(c.i_dc_points));
            const ModulationMap map = modulation_map(c.emulator, dc_grid, flags.i_sq_grid(c), c.n_pulses, c.seed);
            csv.header({"i_dc_A", "i_sq_A", "p_sw"});
            for (std::size_t a = 0; a < map.i_dc.size(); ++a) {
                for (std::size_t b = 0; b < map.i_sq.size(); ++b) csv.row({map.i_dc[a], map.i_sq[b], map.at(a, b)});
            }
        } else if (hist->parsed()) {
            const VthSamples s = sample_vth_histogram(c.emulator, c.i_dc, samples.value_or(c.hist_samples),
                                                      NoiseSource(c.emulator.noise_sigma, c.seed));
            csv.header({"v_th_V", "count"});
            for (const auto& b : s.histogram(bins.value_or(c.hist_bins))) {
                csv.row({b.center, static_cast<double>(b.count)});
            }
        } else if (fb->parsed()) {
            const std::uint32_t n_iters = iters.value_or(c.fb_iters);
            FeedbackPlan plan = rising_branch_plan(c.emulator, n_iters, c.seed);
            plan.gain = gain.value_or(c.fb_gain);
            plan.n_pulses = c.n_pulses;
            plan.disturbance = step_disturbance(n_iters, step_at.value_or(c.fb_step_at), step_v.value_or(c.fb_step));
            const FeedbackTrace trace = flux_feedback(c.emulator, plan);
            csv.header({"iteration", "p_hat", "i_dc_A", "disturbance_V"});
            for (const auto& s : trace.steps) {
                csv.row({static_cast<double>(s.iteration), s.p_hat, s.i_dc, s.disturbance});
            }
            if (trace.branch_escape) err << "squidemu: warning: " << *trace.branch_escape << "\n";
        } else if (cal->parsed()) {
            CalibrationOptions opt;
            opt.ramp = SweepPlan::triangle_ramp(c.i_sq_min, c.i_sq_max, c.i_sq_points - 1, reps.value_or(c.n_avg),
                                                c.seed, c.i_dc);
            opt.sigma_max = sigma_max.value_or(c.cal_sigma_max);
            opt.resolution = resolution.value_or(c.cal_resolution);
            opt.closure_fraction = c.cal_closure;
            const NoiseLevels lv = calibrate_noise_levels(c.emulator, opt);
            csv.header({"sigma_large_V", "sigma_medium_V"});
            csv.row({lv.sigma_large, lv.sigma_medium});
        }
        return kExitOk;
    } catch (const InvalidInput& e) {
        err << "squidemu: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "squidemu: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int run_cli(int argc, const char* const* argv)
{
    return run_cli(argc, argv, std::cout, std::cerr);
}

}  // namespace squidemu
