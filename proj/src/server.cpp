#include "squidemu/server.hpp"

#include <boost/asio.hpp>

#include <list>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace squidemu {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

constexpr std::size_t kMaxLine = 64 * 1024;

void serve_connection(tcp::socket& socket, InstrumentSession session)
{
    asio::streambuf buffer(kMaxLine);
    boost::system::error_code ec;
    for (;;) {
        const std::size_t n = asio::read_until(socket, buffer, '\n', ec);
        if (ec) return;  // peer closed, shutdown, or an over-long line
        std::string line(asio::buffers_begin(buffer.data()), asio::buffers_begin(buffer.data()) + n);
        buffer.consume(n);

        const Response r = session.handle(line);
        asio::write(socket, asio::buffer(r.text + "\n"), ec);
        if (ec || r.close) return;
    }
}

}  // namespace

struct InstrumentServer::Impl {
    asio::io_context io;
    tcp::acceptor acceptor{io};
    asio::signal_set signals{io};
    SessionFactory factory;

    std::mutex mutex;
    bool stopping = false;
    struct Connection {
        tcp::socket socket;
        std::thread worker;
        bool done = false;
    };
    std::list<Connection> connections;

    void accept_next()
    {
        acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
            if (ec) return;
            start(std::move(socket));
            accept_next();
        });
    }

    void start(tcp::socket socket)
    {
        std::lock_guard lock(mutex);
        reap();
        if (stopping) return;
        auto& conn = connections.emplace_back(Connection{std::move(socket), {}, false});
        conn.worker = std::thread([this, &conn, session = factory()]() mutable {
            serve_connection(conn.socket, std::move(session));
            boost::system::error_code ignored;
            conn.socket.shutdown(tcp::socket::shutdown_both, ignored);
            std::lock_guard lock(mutex);
            conn.done = true;
        });
    }

    // Caller holds the mutex.
    void reap()
    {
        for (auto it = connections.begin(); it != connections.end();) {
            if (it->done) {
                it->worker.join();
                it = connections.erase(it);
            } else {
                ++it;
            }
        }
    }

    void shutdown_all()
    {
        std::list<Connection> closing;
        {
            std::lock_guard lock(mutex);
            stopping = true;
            for (auto& c : connections) {
                boost::system::error_code ignored;
                c.socket.shutdown(tcp::socket::shutdown_both, ignored);
            }
        }
        for (auto& c : connections) {
            if (c.worker.joinable()) c.worker.join();
        }
        std::lock_guard lock(mutex);
        connections.clear();
    }
};

InstrumentServer::InstrumentServer(const std::string& address, unsigned short port, SessionFactory factory)
    : impl_(std::make_unique<Impl>())
{
    impl_->factory = std::move(factory);
    boost::system::error_code ec;
    const auto addr = asio::ip::make_address(address, ec);
    if (ec) throw std::runtime_error("invalid bind address '" + address + "': " + ec.message());
    const tcp::endpoint endpoint(addr, port);
    impl_->acceptor.open(endpoint.protocol(), ec);
    if (!ec) impl_->acceptor.set_option(tcp::acceptor::reuse_address(true), ec);
    if (!ec) impl_->acceptor.bind(endpoint, ec);
    if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) {
        throw std::runtime_error("cannot listen on " + address + ":" + std::to_string(port) + ": " + ec.message());
    }
}

InstrumentServer::~InstrumentServer()
{
    stop();
    impl_->shutdown_all();
}

unsigned short InstrumentServer::port() const
{
    return impl_->acceptor.local_endpoint().port();
}

void InstrumentServer::run(bool handle_signals)
{
    if (handle_signals) {
        impl_->signals.add(SIGINT);
        impl_->signals.add(SIGTERM);
        impl_->signals.async_wait([this](boost::system::error_code ec, int) {
            if (!ec) stop();
        });
    }
    impl_->accept_next();
    impl_->io.run();
    boost::system::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->signals.cancel(ignored);
    impl_->shutdown_all();
}

void InstrumentServer::stop()
{
    impl_->io.stop();
}

}  // namespace squidemu
