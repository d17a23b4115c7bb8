#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace mcp2osc {

// Read-only monitoring endpoint: GET /status returns a JSON snapshot, GET
// /live upgrades to a websocket that carries one JSON log entry per text
// frame. Subscribers that fall 1000 frames behind are dropped; monitoring
// never back-pressures the control path.
class StatusEndpoint {
public:
    StatusEndpoint(std::uint16_t port, std::function<nlohmann::json()> snapshot);
    ~StatusEndpoint();

    StatusEndpoint(const StatusEndpoint&) = delete;
    StatusEndpoint& operator=(const StatusEndpoint&) = delete;

    bool running() const { return listen_fd_ >= 0; }
    std::uint16_t port() const { return port_; }
    std::string bind_error() const { return bind_error_; }

    // Broadcast one frame to every live subscriber (called by the log
    // observer with the serialized entry).
    void publish(const std::string& frame);

    std::size_t subscriber_count() const;

    static constexpr std::size_t kBacklogLimit = 1000;

private:
    struct Subscriber;

    void accept_loop();
    void handle_connection(int fd);
    void reap_locked();

    std::function<nlohmann::json()> snapshot_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::string bind_error_;

    std::atomic<bool> stop_{false};
    std::thread acceptor_;

    mutable std::mutex subscribers_mutex_;
    std::vector<std::shared_ptr<Subscriber>> subscribers_;
};

} // namespace mcp2osc
