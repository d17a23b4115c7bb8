#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mcp2osc/osc_types.hpp"
#include "mcp2osc/pattern_store.hpp"
#include "mcp2osc/transport.hpp"

namespace mcp2osc {

struct BatchOptions {
    bool as_bundle = true;
    bool override_validation = false;
    std::optional<std::string> dest;
    // Accepted but not scheduled: bundles always go out now with IMMEDIATE.
    std::optional<OscTimetag> requested_timetag;
};

struct BatchReport {
    std::size_t messages = 0;
    std::size_t datagrams = 0;
    std::size_t total_bytes = 0;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

enum class StreamShape { Linear, Exponential, EaseInOut };
std::optional<StreamShape> stream_shape_from_string(const std::string& name);

struct StreamSpec {
    std::string address;
    float start_value = 0.0f;
    float end_value = 0.0f;
    double duration_s = 0.0; // (0, 600]
    double rate_hz = 50.0;   // [1, 200]
    StreamShape shape = StreamShape::Linear;
    std::optional<std::string> dest;
};

struct StreamReport {
    int id = 0;
    std::string address;
    std::uint64_t messages_sent = 0;
    std::uint64_t planned = 0;
    bool completed = false;
    bool stopped_early = false;
    double elapsed_s = 0;

    nlohmann::json to_json() const;
};

struct TestReport {
    bool pass = false;
    std::string probe_address;
    std::int32_t nonce = 0;
    double round_trip_ms = 0;
    std::string sent_at, received_at; // ISO-8601
    std::string failure_reason;       // "timeout" / "wrong-nonce" / "decode-error" detail

    nlohmann::json to_json() const;
};

struct NamespaceNode {
    std::string full_path;
    std::optional<std::string> description;
    std::optional<std::string> type_signature;
    nlohmann::json current_value;             // null when absent
    std::optional<int> access;
    std::optional<std::string> return_type;   // parsed when present
    std::map<std::string, NamespaceNode> children;

    nlohmann::json to_json() const;
    std::size_t leaf_count() const;
};

inline constexpr int kMaxActiveStreams = 16;

// Higher-order operations composed from codec + address + transport +
// pattern-store.
class ControlOps {
public:
    ControlOps(Transport& transport, PatternStore& patterns);
    ~ControlOps();

    // Validates every message against the store first; refuses on violations
    // unless override_validation. as_bundle packs greedily into the fewest
    // IMMEDIATE bundles that fit the datagram limit, preserving order.
    BatchReport send_batch(const std::vector<OscMessage>& messages,
                           const BatchOptions& options = {});

    int start_stream(const StreamSpec& spec);
    StreamReport stop_stream(int id);
    std::size_t active_stream_count() const;
    void stop_all_streams();

    // Probe "/mcp2osc/ping" with a fresh nonce; pass iff "/mcp2osc/pong"
    // echoes it within the timeout. Failures are report outcomes, not errors.
    TestReport run_bidirectional_test(int timeout_ms,
                                      const std::string& probe_address = "/mcp2osc/ping");

    NamespaceNode discover_namespace(const std::string& host, int port,
                                     const std::string& path = "/");

    static std::uint64_t planned_stream_messages(const StreamSpec& spec);
    static float stream_value(const StreamSpec& spec, std::uint64_t k, std::uint64_t n);

private:
    struct StreamState;

    Transport& transport_;
    PatternStore& patterns_;

    mutable std::mutex streams_mutex_;
    std::map<int, std::shared_ptr<StreamState>> streams_;
    int next_stream_id_ = 1;
};

} // namespace mcp2osc
