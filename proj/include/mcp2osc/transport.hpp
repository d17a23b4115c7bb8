#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mcp2osc/message_log.hpp"
#include "mcp2osc/osc_types.hpp"
#include "mcp2osc/util.hpp"

namespace mcp2osc {

struct EndpointConfig {
    std::string send_host = "127.0.0.1";
    std::uint16_t send_port = 7400;
    std::uint16_t receive_port = 7500;
    int receive_bind_attempts = 5;
    std::size_t max_datagram = 1472;

    // MCP2OSC_SEND_HOST / MCP2OSC_SEND_PORT / MCP2OSC_RECEIVE_PORT /
    // MCP2OSC_MAX_DATAGRAM / MCP2OSC_BIND_ATTEMPTS
    static EndpointConfig from_env();
    void validate() const; // throws Error(InvalidConfig)
};

struct ReceivedDatagram {
    std::vector<std::uint8_t> bytes; // <= 65507
    std::string source;              // host:port
    WallClock::time_point wall_time;
    std::uint64_t mono_ns = 0;
};

struct SendReport {
    std::string dest;
    std::size_t bytes = 0;
    std::vector<std::uint64_t> log_seqs;
};

// One UDP socket used for both directions. The receive thread decodes each
// datagram, logs it (flattened; decode failures keep a marked raw entry),
// then queues it for poll_received and notifies listeners.
class Transport {
public:
    // Called on the receive thread. packet is null when decoding failed, in
    // which case decode_error holds the reason.
    using Listener = std::function<void(const ReceivedDatagram& datagram,
                                        const OscPacket* packet,
                                        const std::string& decode_error)>;

    Transport(const EndpointConfig& config, MessageLog* log);
    ~Transport();

    Transport(const Transport&) = delete;
    Transport& operator=(const Transport&) = delete;

    std::uint16_t bound_receive_port() const { return bound_port_; }
    bool used_port_fallback() const { return fallback_; }
    const EndpointConfig& config() const { return config_; }

    // Encodes and emits one datagram; appends direction=out log entries.
    // dest defaults to the configured send target.
    SendReport send(const OscPacket& packet, const std::optional<std::string>& dest = {});

    // All datagrams arrived since the last poll, in arrival order; atomic
    // drain, nothing delivered twice.
    std::vector<ReceivedDatagram> poll_received();

    std::uint64_t add_listener(Listener listener);
    void remove_listener(std::uint64_t id);

    std::uint64_t datagrams_sent() const { return datagrams_sent_.load(); }
    std::uint64_t datagrams_received() const { return datagrams_received_.load(); }

private:
    void receive_loop();

    EndpointConfig config_;
    MessageLog* log_ = nullptr;
    int fd_ = -1;
    std::uint16_t bound_port_ = 0;
    bool fallback_ = false;

    std::atomic<bool> stop_{false};
    std::thread receiver_;

    mutable std::mutex queue_mutex_;
    std::deque<ReceivedDatagram> queue_;
    static constexpr std::size_t kQueueCap = 10000;

    mutable std::mutex listener_mutex_;
    std::map<std::uint64_t, Listener> listeners_;
    std::uint64_t next_listener_id_ = 1;

    mutable std::mutex resolve_mutex_;
    std::map<std::string, std::pair<std::uint32_t, std::uint16_t>> resolve_cache_;

    std::atomic<std::uint64_t> datagrams_sent_{0};
    std::atomic<std::uint64_t> datagrams_received_{0};
};

} // namespace mcp2osc
