#pragma once

#include <filesystem>
#include <memory>

#include <json.hpp>

#include "mcp2osc/control_ops.hpp"
#include "mcp2osc/message_log.hpp"
#include "mcp2osc/pattern_store.hpp"
#include "mcp2osc/status_endpoint.hpp"
#include "mcp2osc/transport.hpp"

namespace mcp2osc {

struct BridgeConfig {
    EndpointConfig endpoint;
    std::filesystem::path log_path = "./mcp2osc-log.jsonl";
    std::filesystem::path pattern_path = "./patterns.json";
    std::uint16_t dashboard_port = 0; // 0 disables the status endpoint

    // Also reads MCP2OSC_LOG_PATH, MCP2OSC_PATTERN_PATH,
    // MCP2OSC_DASHBOARD_PORT on top of the transport env vars.
    static BridgeConfig from_env();
};

// Owns and wires the whole server: pattern store, message log, UDP transport,
// control operations and the optional status endpoint.
class Bridge {
public:
    explicit Bridge(BridgeConfig config);
    ~Bridge();

    MessageLog& log() { return *log_; }
    PatternStore& patterns() { return *patterns_; }
    Transport& transport() { return *transport_; }
    ControlOps& control() { return *control_; }

    nlohmann::json status_json() const;
    std::uint16_t dashboard_port() const { return status_ ? status_->port() : 0; }
    StatusEndpoint* status_endpoint() { return status_.get(); }
    const BridgeConfig& config() const { return config_; }

private:
    BridgeConfig config_;
    MonoClock::time_point started_;
    std::unique_ptr<PatternStore> patterns_;
    std::unique_ptr<MessageLog> log_;
    std::unique_ptr<Transport> transport_;
    std::unique_ptr<ControlOps> control_;
    std::unique_ptr<StatusEndpoint> status_;
};

} // namespace mcp2osc
