#include "squidemu/instrument.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <vector>

#include "squidemu/csv.hpp"
#include "squidemu/error.hpp"
#include "squidemu/protocols.hpp"

namespace squidemu {

namespace {

constexpr std::uint32_t kMaxScurvePoints = 100000;
constexpr std::uint32_t kMaxScurvePulses = 1000000;

const Response kOk{"OK"};
const Response kUnknown{"ERR 1 unknown"};
const Response kParse{"ERR 2 parse"};
const Response kRange{"ERR 3 range"};

struct ParseError {};
struct RangeError {};

std::string upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(c >= 'a' && c <= 'z' ? c - 32 : c); });
    return out;
}

// Printable ASCII plus tab; anything else (including stray UTF-8) is a parse error.
bool clean_ascii(std::string_view line)
{
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return c == '\t' || (c >= 0x20 && c < 0x7F); });
}

std::vector<std::string_view> tokenize(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        pos = line.find_first_not_of(" \t", pos);
        if (pos == std::string_view::npos) break;
        const auto end = line.find_first_of(" \t", pos);
        tokens.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        pos = end;
    }
    return tokens;
}

double number(std::string_view s)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError{};
    if (!std::isfinite(v)) throw RangeError{};
    return v;
}

std::uint64_t unsigned_number(std::string_view s)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc::result_out_of_range) throw RangeError{};
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError{};
    return v;
}

double* config_field(EmulatorConfig& cfg, std::string_view key)
{
    if (key == "RIN") return &cfg.r_in;
    if (key == "RNORM") return &cfg.r_normal;
    if (key == "VTH0") return &cfg.v_th0;
    if (key == "VOFF") return &cfg.v_offset;
    if (key == "SIGMA") return &cfg.noise_sigma;
    if (key == "MODDEPTH") return &cfg.tri_cfg.mod_depth;
    if (key == "GDC") return &cfg.tri_cfg.g_dc;
    return nullptr;
}

}  // namespace

InstrumentSession::InstrumentSession(EmulatorConfig cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed)
{
    cfg_.validate();
}

Response InstrumentSession::handle(std::string_view line)
{
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!clean_ascii(line)) return kParse;
    const auto tok = tokenize(line);
    if (tok.empty()) return kParse;

    const std::string cmd = upper(tok[0]);
    const std::size_t argc = tok.size() - 1;
    try {
        if (cmd == "SET") {
            if (argc != 2) return kParse;
            return set(upper(tok[1]), tok[2]);
        }
        if (cmd == "GET") {
            if (argc != 1) return kParse;
            return get(upper(tok[1]));
        }
        if (cmd == "IDC") {
            if (argc != 1) return kParse;
            const Amperes limit = cfg_.tri_cfg.idc_fullscale();
            i_dc_ = std::clamp(number(tok[1]), -limit, limit);
            return kOk;
        }
        if (cmd == "PULSE") {
            if (argc != 1) return kParse;
            const Amperes i_sq = number(tok[1]);
            const Volts v_n = NoiseSource(cfg_.noise_sigma, seed_).draw(OpId::Session, 0, pulses_++);
            const StepResult r = step(DeviceState{}, cfg_, i_sq, i_dc_, v_n);
            device_ = r.state;
            return {r.state.phase == Phase::Resistive ? "1" : "0"};
        }
        if (cmd == "RESET") {
            if (argc != 0) return kParse;
            device_ = {};
            pulses_ = 0;
            scurves_ = 0;
            return kOk;
        }
        if (cmd == "SCURVE") {
            if (argc != 4) return kParse;
            return scurve(number(tok[1]), number(tok[2]), static_cast<double>(unsigned_number(tok[3])),
                          static_cast<double>(unsigned_number(tok[4])));
        }
        if (cmd == "QUIT") {
            if (argc != 0) return kParse;
            return {"OK", true};
        }
    } catch (const ParseError&) {
        return kParse;
    } catch (const RangeError&) {
        return kRange;
    } catch (const InvalidInput&) {
        return kRange;
    }
    return kUnknown;
}

Response InstrumentSession::set(std::string_view key, std::string_view value)
{
    if (key == "SEED") {
        seed_ = unsigned_number(value);
        pulses_ = 0;
        scurves_ = 0;
        return kOk;
    }
    EmulatorConfig next = cfg_;
    double* field = config_field(next, key);
    if (field == nullptr) return kUnknown;
    *field = number(value);
    next.validate();  // InvalidInput -> ERR 3, old config kept
    cfg_ = next;
    return kOk;
}

Response InstrumentSession::get(std::string_view key) const
{
    if (key == "SEED") return {std::to_string(seed_)};
    EmulatorConfig copy = cfg_;
    const double* field = config_field(copy, key);
    if (field == nullptr) return kUnknown;
    return {format_exact(*field)};
}

Response InstrumentSession::scurve(double imin, double imax, double points, double npulses)
{
    if (points < 1 || points > kMaxScurvePoints || npulses < 1 || npulses > kMaxScurvePulses) {
        return kRange;
    }
    const auto grid = linear_grid(imin, imax, static_cast<std::size_t>(points));
    const std::uint64_t seed = seed_ ^ (0x9E3779B97F4A7C15ull * scurves_++);
    const SCurve sc = s_curve(cfg_, grid, i_dc_, static_cast<std::uint32_t>(npulses), seed);
    std::string text;
    for (std::size_t k = 0; k < sc.p_sw.size(); ++k) {
        if (k) text += ',';
        text += format_float(sc.p_sw[k]);
    }
    return {text};
}

}  // namespace squidemu
