#pragma once

#include <functional>
#include <memory>
#include <string>

#include "squidemu/instrument.hpp"

namespace squidemu {

using SessionFactory = std::function<InstrumentSession()>;

/// Line-oriented TCP front end. Each connection gets its own session from
/// the factory and its own thread; commands on a connection are handled
/// strictly in order.
class InstrumentServer {
public:
    /// Binds immediately; throws std::runtime_error with a diagnostic on
    /// failure. Port 0 picks an ephemeral port.
    InstrumentServer(const std::string& address, unsigned short port, SessionFactory factory);
    ~InstrumentServer();

    InstrumentServer(const InstrumentServer&) = delete;
    InstrumentServer& operator=(const InstrumentServer&) = delete;

    unsigned short port() const;

    /// Serve until stop() or, with handle_signals, SIGINT/SIGTERM.
    void run(bool handle_signals = false);

    /// Thread-safe. Closes the listener and all open connections.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace squidemu
