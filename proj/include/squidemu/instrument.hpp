#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "squidemu/device.hpp"

namespace squidemu {

struct Response {
    std::string text;     // without the trailing newline
    bool close = false;   // QUIT: the connection ends after this reply
};

/// Wire-level state of one connected client: the emulated box of the
/// readout chain with its flux-bias setpoint and pulse input.
///
/// Grammar (case-insensitive, one command per line):
///   SET <KEY> <value>  -> OK        GET <KEY> -> value
///   IDC <amperes>      -> OK        PULSE <amperes> -> 1 | 0
///   RESET              -> OK
///   SCURVE <imin> <imax> <points> <npulses> -> p_sw,p_sw,...
///   QUIT               -> OK, then the server closes the connection
/// KEY is one of RIN RNORM VTH0 VOFF SIGMA MODDEPTH GDC SEED.
/// Errors: `ERR 1 unknown`, `ERR 2 parse`, `ERR 3 range`.
class InstrumentSession {
public:
    explicit InstrumentSession(EmulatorConfig cfg = {}, std::uint64_t seed = 0);

    Response handle(std::string_view line);

    const EmulatorConfig& config() const { return cfg_; }
    Amperes i_dc() const { return i_dc_; }
    const DeviceState& device() const { return device_; }
    std::uint64_t seed() const { return seed_; }

private:
    Response set(std::string_view key, std::string_view value);
    Response get(std::string_view key) const;
    Response scurve(double imin, double imax, double points, double npulses);

    EmulatorConfig cfg_;
    Amperes i_dc_ = 0.0;
    DeviceState device_{};
    std::uint64_t seed_ = 0;
    std::uint64_t pulses_ = 0;  // draw counter of the session stream
    std::uint64_t scurves_ = 0;
};

inline Response handle_command(InstrumentSession& session, std::string_view line)
{
    return session.handle(line);
}

}  // namespace squidemu
