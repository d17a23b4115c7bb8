#include "mcp2osc/bridge.hpp"

#include "mcp2osc/util.hpp"

namespace mcp2osc {

using nlohmann::json;

BridgeConfig BridgeConfig::from_env()
{
    BridgeConfig c;
    c.endpoint = EndpointConfig::from_env();
    c.log_path = env_or("MCP2OSC_LOG_PATH", c.log_path.string());
    c.pattern_path = env_or("MCP2OSC_PATTERN_PATH", c.pattern_path.string());
    c.dashboard_port = std::uint16_t(env_or_int("MCP2OSC_DASHBOARD_PORT", 0));
    return c;
}

Bridge::Bridge(BridgeConfig config) : config_(std::move(config)), started_(MonoClock::now())
{
    patterns_ = std::make_unique<PatternStore>(config_.pattern_path);
    log_ = std::make_unique<MessageLog>(MessageLog::Config{config_.log_path});
    transport_ = std::make_unique<Transport>(config_.endpoint, log_.get());
    control_ = std::make_unique<ControlOps>(*transport_, *patterns_);
    if (config_.dashboard_port != 0) { // port 0 disables the endpoint entirely
        status_ = std::make_unique<StatusEndpoint>(config_.dashboard_port,
                                                   [this] { return status_json(); });
        if (status_->running())
            log_->set_observer(
                [this](const LogEntry&, const std::string& line) { status_->publish(line); });
    }
}

Bridge::~Bridge()
{
    // streams first (they use the transport), then silence the feed, then
    // tear down the endpoint, transport, log, store
    control_.reset();
    log_->set_observer({});
    status_.reset();
    transport_.reset();
    log_.reset();
    patterns_.reset();
}

json Bridge::status_json() const
{
    json j = json::object();
    j["uptime_s"] = std::chrono::duration<double>(MonoClock::now() - started_).count();
    j["bound_receive_port"] = transport_->bound_receive_port();
    j["send_target"] = config_.endpoint.send_host + ":" + std::to_string(config_.endpoint.send_port);
    j["counters"] = {{"sent", log_->count(Direction::Out)},
                     {"received", log_->count(Direction::In)},
                     {"decode_errors", log_->decode_error_count()}};
    j["active_streams"] = control_->active_stream_count();
    j["pattern_count"] = patterns_->size();
    j["log_file_size_bytes"] = log_->file_size_bytes();
    json degraded = json::array();
    if (transport_->used_port_fallback())
        degraded.push_back("receive_port_fallback");
    if (log_->degraded())
        degraded.push_back("log_io_degraded");
    if (config_.dashboard_port != 0 && (!status_ || !status_->running()))
        degraded.push_back("dashboard_unavailable");
    j["degraded_flags"] = degraded;
    return j;
}

} // namespace mcp2osc
