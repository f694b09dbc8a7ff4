#include "squidemu/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "squidemu/csv.hpp"
#include "squidemu/error.hpp"

namespace squidemu {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view s)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidInput("not a number: '" + std::string(s) + "'");
    require_finite(v, "value");
    return v;
}

template <class Int>
Int parse_int(std::string_view s)
{
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidInput("not a non-negative integer: '" + std::string(s) + "'");
    }
    return v;
}

struct Field {
    std::string_view key;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <class Member>
Field real(std::string_view key, Member member)
{
    return {key, [member](ExperimentConfig& c, std::string_view v) { std::invoke(member, c) = parse_double(v); },
            [member](const ExperimentConfig& c) { return format_exact(std::invoke(member, c)); }};
}

template <class Int, class Member>
Field integer(std::string_view key, Member member)
{
    return {key, [member](ExperimentConfig& c, std::string_view v) { std::invoke(member, c) = parse_int<Int>(v); },
            [member](const ExperimentConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

const std::vector<Field>& fields()
{
    using C = ExperimentConfig;
    static const std::vector<Field> table = {
        real("r_in", [](auto& c) -> auto& { return c.emulator.r_in; }),
        real("r_normal", [](auto& c) -> auto& { return c.emulator.r_normal; }),
        real("v_th0", [](auto& c) -> auto& { return c.emulator.v_th0; }),
        real("v_offset", [](auto& c) -> auto& { return c.emulator.v_offset; }),
        real("noise_sigma", [](auto& c) -> auto& { return c.emulator.noise_sigma; }),
        real("mod_depth", [](auto& c) -> auto& { return c.emulator.tri_cfg.mod_depth; }),
        real("v_fullscale", [](auto& c) -> auto& { return c.emulator.tri_cfg.v_fullscale; }),
        real("g_dc", [](auto& c) -> auto& { return c.emulator.tri_cfg.g_dc; }),
        {"modulation",
         [](C& c, std::string_view v) {
             if (v == "triangular") {
                 c.emulator.modulation = ModulationMode::Triangular;
             } else if (v == "sinusoidal") {
                 c.emulator.modulation = ModulationMode::Sinusoidal;
             } else {
                 throw InvalidInput("modulation must be triangular or sinusoidal");
             }
         },
         [](const C& c) {
             return std::string(c.emulator.modulation == ModulationMode::Sinusoidal ? "sinusoidal" : "triangular");
         }},
        integer<int>("taylor_terms", [](auto& c) -> auto& { return c.emulator.taylor_terms; }),
        integer<std::uint64_t>("seed", &C::seed),
        integer<std::uint32_t>("n_pulses", &C::n_pulses),
        integer<std::uint32_t>("n_avg", &C::n_avg),
        real("i_sq_min", &C::i_sq_min),
        real("i_sq_max", &C::i_sq_max),
        integer<std::uint32_t>("i_sq_points", &C::i_sq_points),
        real("i_dc", &C::i_dc),
        real("i_dc_min", &C::i_dc_min),
        real("i_dc_max", &C::i_dc_max),
        integer<std::uint32_t>("i_dc_points", &C::i_dc_points),
        integer<std::uint32_t>("hist_samples", &C::hist_samples),
        integer<std::uint32_t>("hist_bins", &C::hist_bins),
        real("fb_gain", &C::fb_gain),
        integer<std::uint32_t>("fb_iters", &C::fb_iters),
        integer<std::uint32_t>("fb_step_at", &C::fb_step_at),
        real("fb_step", &C::fb_step),
        real("cal_sigma_max", &C::cal_sigma_max),
        real("cal_resolution", &C::cal_resolution),
        real("cal_closure", &C::cal_closure),
    };
    return table;
}

}  // namespace

void ExperimentConfig::validate() const
{
    emulator.validate();
    if (n_pulses == 0) throw InvalidInput("n_pulses must be >= 1");
    if (n_avg == 0) throw InvalidInput("n_avg must be >= 1");
    if (i_sq_points == 0 || i_dc_points == 0) throw InvalidInput("grids need at least one point");
    if (hist_samples == 0 || hist_bins == 0) throw InvalidInput("histogram needs samples and bins");
    if (fb_gain < 0.0) throw InvalidInput("fb_gain must be >= 0");
    if (fb_iters == 0) throw InvalidInput("fb_iters must be >= 1");
    if (!(cal_sigma_max > 0.0) || !(cal_resolution > 0.0) || !(cal_closure > 0.0)) {
        throw InvalidInput("calibration settings must be positive");
    }
}

ExperimentConfig parse_config(std::string_view text)
{
    ExperimentConfig cfg;
    std::set<std::string_view> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw InvalidInput(where() + "expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));

        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
        if (it == table.end()) throw InvalidInput(where() + "unknown key '" + std::string(key) + "'");
        if (!seen.insert(it->key).second) throw InvalidInput(where() + "duplicate key '" + std::string(key) + "'");
        try {
            it->set(cfg, value);
        } catch (const InvalidInput& e) {
            throw InvalidInput(where() + std::string(key) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

std::string to_config_text(const ExperimentConfig& cfg)
{
    std::string out;
    for (const Field& f : fields()) {
        out += f.key;
        out += " = ";
        out += f.get(cfg);
        out += '\n';
    }
    return out;
}

}  // namespace squidemu
