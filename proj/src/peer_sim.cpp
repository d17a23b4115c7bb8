#include "mcp2osc/peer_sim.hpp"

#include "mcp2osc/codec.hpp"
#include "mcp2osc/error.hpp"
#include "mcp2osc/pattern_store.hpp"
#include "mcp2osc/util.hpp"

#include <httplib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace mcp2osc {

using nlohmann::json;

std::optional<PeerOptions::Mode> peer_mode_from_string(const std::string& name)
{
    if (name == "echo")
        return PeerOptions::Mode::Echo;
    if (name == "robotics")
        return PeerOptions::Mode::Robotics;
    if (name == "sink")
        return PeerOptions::Mode::Sink;
    if (name == "oscquery")
        return PeerOptions::Mode::OscQuery;
    return std::nullopt;
}

namespace {

constexpr double kBaseFrequencyHz = 0.2;

sockaddr_in make_addr(const std::string& host, std::uint16_t port)
{
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

} // namespace

std::pair<float, float> PeerSim::robot_sample(int joint, double t)
{
    double omega = 2.0 * std::numbers::pi * kBaseFrequencyHz;
    double phase = joint * std::numbers::pi / 8.0;
    return {float(std::sin(omega * t + phase)), float(omega * std::cos(omega * t + phase))};
}

json PeerSim::default_oscquery_fixture()
{
    return json::parse(R"({
        "FULL_PATH": "/",
        "DESCRIPTION": "peer-sim synth fixture",
        "CONTENTS": {
            "synth": {
                "FULL_PATH": "/synth",
                "CONTENTS": {
                    "freq": {"FULL_PATH": "/synth/freq", "TYPE": "f",
                             "DESCRIPTION": "oscillator frequency in Hz",
                             "VALUE": [440.0], "ACCESS": 3},
                    "amp": {"FULL_PATH": "/synth/amp", "TYPE": "f",
                            "DESCRIPTION": "output amplitude",
                            "VALUE": [0.5], "ACCESS": 3},
                    "gate": {"FULL_PATH": "/synth/gate", "TYPE": "i",
                             "DESCRIPTION": "note on/off gate",
                             "VALUE": [0], "ACCESS": 3}
                }
            }
        }
    })");
}

PeerSim::PeerSim(const PeerOptions& options) : options_(options)
{
    if (options_.joints < 1 || options_.joints > 16)
        raise(ErrorKind::InvalidConfig, "joints must be in 1..16");
    if (options_.rate_hz < 1 || options_.rate_hz > 100)
        raise(ErrorKind::InvalidConfig, "rate must be in 1..100 Hz");

    if (options_.mode == PeerOptions::Mode::OscQuery) {
        if (options_.fixture_file.empty()) {
            fixture_ = default_oscquery_fixture();
        } else {
            std::ifstream in(options_.fixture_file);
            if (!in)
                raise(ErrorKind::BadFixture,
                      "cannot open fixture " + options_.fixture_file.string());
            fixture_ = json::parse(in, nullptr, false);
            if (fixture_.is_discarded() || !fixture_.is_object())
                raise(ErrorKind::BadFixture,
                      options_.fixture_file.string() + " is not a JSON object");
        }
        auto* server = new httplib::Server();
        http_server_ = server;
        int port = options_.listen_port == 0
                       ? server->bind_to_any_port(options_.listen_host)
                       : (server->bind_to_port(options_.listen_host, options_.listen_port)
                              ? options_.listen_port
                              : -1);
        if (port <= 0) {
            delete server;
            http_server_ = nullptr;
            raise(ErrorKind::PortBusy, "cannot bind HTTP " + options_.listen_host + ":" +
                                           std::to_string(options_.listen_port));
        }
        bound_port_ = std::uint16_t(port);

        server->Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
            // navigate CONTENTS for sub-paths; "/" serves the whole document
            const json* node = &fixture_;
            if (req.path != "/") {
                std::size_t i = 1;
                while (i <= req.path.size()) {
                    auto j = req.path.find('/', i);
                    if (j == std::string::npos)
                        j = req.path.size();
                    std::string seg = req.path.substr(i, j - i);
                    if (!node->contains("CONTENTS") || !(*node)["CONTENTS"].contains(seg)) {
                        res.status = 404;
                        res.set_content("{\"error\":\"no such node\"}", "application/json");
                        return;
                    }
                    node = &(*node)["CONTENTS"][seg];
                    i = j + 1;
                }
            }
            res.set_content(node->dump(2), "application/json");
        });
        return;
    }

    if (options_.mode == PeerOptions::Mode::Sink && !options_.patterns_file.empty())
        sink_store_.emplace(options_.patterns_file);

    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0)
        raise(ErrorKind::NetworkError, std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr = make_addr(options_.listen_host, options_.listen_port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd_);
        fd_ = -1;
        raise(ErrorKind::PortBusy, "cannot bind UDP " + options_.listen_host + ":" +
                                       std::to_string(options_.listen_port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    bound_port_ = ntohs(addr.sin_port);
    timeval tv{0, 100 * 1000};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

PeerSim::~PeerSim()
{
    if (fd_ >= 0)
        ::close(fd_);
    delete static_cast<httplib::Server*>(http_server_);
}

void PeerSim::run(std::atomic<bool>& stop)
{
    if (options_.mode == PeerOptions::Mode::OscQuery)
        run_oscquery(stop);
    else
        run_udp(stop);
}

void PeerSim::run_oscquery(std::atomic<bool>& stop)
{
    auto* server = static_cast<httplib::Server*>(http_server_);
    std::thread watchdog([&] {
        while (!stop)
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        server->stop();
    });
    server->listen_after_bind();
    stop = true;
    watchdog.join();
}

void PeerSim::run_udp(std::atomic<bool>& stop)
{
    const auto started = MonoClock::now();
    const bool robotics = options_.mode == PeerOptions::Mode::Robotics;
    const sockaddr_in reply = make_addr(options_.reply_host, options_.reply_port);
    const auto tick = std::chrono::duration_cast<MonoClock::duration>(
        std::chrono::duration<double>(1.0 / options_.rate_hz));

    std::thread generator;
    if (robotics) {
        generator = std::thread([&] {
            std::uint64_t k = 0;
            while (!stop) {
                std::this_thread::sleep_until(started + tick * k);
                if (stop)
                    break;
                double t = std::chrono::duration<double>(MonoClock::now() - started).count();
                if (options_.duration_s > 0 && t > options_.duration_s)
                    break;
                for (int j = 1; j <= options_.joints; ++j) {
                    auto [pos, vel] = robot_sample(j, t);
                    std::string base = "/robot/joint" + std::to_string(j);
                    for (auto& [suffix, value] :
                         {std::pair<const char*, float>{"/position", pos},
                          std::pair<const char*, float>{"/velocity", vel}}) {
                        auto bytes = encode_message({base + suffix, {value}});
                        ::sendto(fd_, bytes.data(), bytes.size(), 0,
                                 reinterpret_cast<const sockaddr*>(&reply), sizeof reply);
                        sent_.fetch_add(1);
                    }
                }
                ++k;
            }
        });
    }

    std::vector<std::uint8_t> buf(65536);
    while (!stop) {
        if (options_.duration_s > 0 &&
            std::chrono::duration<double>(MonoClock::now() - started).count() >
                options_.duration_s)
            break;
        sockaddr_in src{};
        socklen_t srclen = sizeof src;
        ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0,
                               reinterpret_cast<sockaddr*>(&src), &srclen);
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)
                continue;
            break;
        }
        received_.fetch_add(1);
        char host[INET_ADDRSTRLEN] = {0};
        ::inet_ntop(AF_INET, &src.sin_addr, host, sizeof host);
        handle_datagram(buf.data(), std::size_t(n),
                        std::string(host) + ":" + std::to_string(ntohs(src.sin_port)));
    }
    if (generator.joinable()) {
        stop = true;
        generator.join();
    }
}

void PeerSim::handle_datagram(const std::uint8_t* data, std::size_t len,
                              const std::string& source)
{
    std::span<const std::uint8_t> bytes(data, len);

    if (options_.mode == PeerOptions::Mode::Echo) {
        const sockaddr_in reply = make_addr(options_.reply_host, options_.reply_port);
        std::vector<std::uint8_t> out(bytes.begin(), bytes.end());
        try {
            auto pkt = decode_packet(bytes);
            if (pkt.is_message() && pkt.message().address == "/mcp2osc/ping" &&
                !pkt.message().args.empty()) {
                if (const auto* nonce = std::get_if<std::int32_t>(&pkt.message().args[0]))
                    out = encode_message({"/mcp2osc/pong", {*nonce}});
            }
        } catch (const Error&) {
            // junk goes back verbatim so the sender can see it
        }
        ::sendto(fd_, out.data(), out.size(), 0, reinterpret_cast<const sockaddr*>(&reply),
                 sizeof reply);
        sent_.fetch_add(1);
        return;
    }

    if (options_.mode == PeerOptions::Mode::Sink) {
        std::ostream& out = options_.out ? *options_.out : std::cout;
        try {
            auto pkt = decode_packet(bytes);
            std::vector<const OscMessage*> flat;
            std::function<void(const OscPacket&)> walk = [&](const OscPacket& p) {
                if (p.is_message())
                    flat.push_back(&p.message());
                else
                    for (const auto& el : p.bundle().elements)
                        walk(el);
            };
            walk(pkt);
            for (const auto* m : flat) {
                out << "recv " << source << " " << to_display(*m) << "\n";
                if (sink_store_) {
                    auto check = sink_store_->validate_args(m->address, m->args);
                    for (const auto& v : check.violations)
                        out << "  violation: " << v << "\n";
                    for (const auto& w : check.warnings)
                        out << "  warning: " << w << "\n";
                }
            }
        } catch (const Error& e) {
            out << "recv " << source << " decode-error (" << e.what() << ") " << len
                << " bytes\n";
        }
        out.flush();
    }
    // robotics mode ignores inbound traffic
}

} // namespace mcp2osc
