#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

namespace mcp2osc {

// Desk-scale stand-in for a real OSC application: echoes probes, emits
// simulated robotics telemetry, prints and validates received traffic, or
// serves an OSCQuery namespace fixture over HTTP.
struct PeerOptions {
    enum class Mode { Echo, Robotics, Sink, OscQuery };

    Mode mode = Mode::Echo;
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 7400;
    std::string reply_host = "127.0.0.1";
    std::uint16_t reply_port = 7500;
    int joints = 3;        // robotics, 1..16
    double rate_hz = 10.0; // robotics, 1..100
    double duration_s = 0; // 0 = run until stopped
    std::filesystem::path patterns_file; // sink: optional validation source
    std::filesystem::path fixture_file;  // oscquery: namespace document
    std::ostream* out = nullptr;         // sink printer; defaults to stdout
};

std::optional<PeerOptions::Mode> peer_mode_from_string(const std::string& name);

class PeerSim {
public:
    // Binds the socket (or HTTP port). Throws Error(PortBusy) or
    // Error(BadFixture).
    explicit PeerSim(const PeerOptions& options);
    ~PeerSim();

    // Blocks until `stop` goes true or duration_s elapses.
    void run(std::atomic<bool>& stop);

    std::uint16_t bound_port() const { return bound_port_; }
    std::uint64_t received() const { return received_.load(); }
    std::uint64_t sent() const { return sent_.load(); }

    // position and its analytic derivative for 1-based joint j at time t
    static std::pair<float, float> robot_sample(int joint, double t);

    static nlohmann::json default_oscquery_fixture();

private:
    void run_udp(std::atomic<bool>& stop);
    void run_oscquery(std::atomic<bool>& stop);
    void handle_datagram(const std::uint8_t* data, std::size_t len,
                         const std::string& source);

    PeerOptions options_;
    int fd_ = -1;
    std::uint16_t bound_port_ = 0;
    nlohmann::json fixture_;
    std::atomic<std::uint64_t> received_{0};
    std::atomic<std::uint64_t> sent_{0};
    void* http_server_ = nullptr; // httplib::Server, kept out of the header
};

} // namespace mcp2osc
