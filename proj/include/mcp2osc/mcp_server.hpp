#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcp2osc/bridge.hpp"

namespace mcp2osc {

inline constexpr const char* kServerName = "mcp2osc";
inline constexpr const char* kServerVersion = "0.1.0";
inline constexpr const char* kProtocolVersion = "2024-11-05";

// JSON-RPC error codes used on the wire.
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kServerNotInitialized = -32002;

struct ToolDescriptor {
    std::string name;
    std::string description;
    nlohmann::json input_schema;
};

// MCP server over newline-delimited JSON-RPC 2.0. Exposes every bridge
// capability as a named tool with a declared input schema. Domain failures
// become is_error tool results; only protocol misuse becomes a JSON-RPC
// error.
class McpServer {
public:
    explicit McpServer(Bridge& bridge);

    // Blocks until the input stream closes. One JSON object per line in, one
    // per line out.
    void serve(std::istream& in, std::ostream& out);

    // Processes one raw input line; nullopt when no response is due (blank
    // line or a notification).
    std::optional<std::string> handle_line(const std::string& line);

    const std::vector<ToolDescriptor>& tools() const { return tools_; }

    // Validates against the tool schema and dispatches. Returns the MCP
    // result object: {"content":[...],"structuredContent":...,"isError":...}.
    // Schema violations throw Error(InvalidSpec); unknown names throw
    // Error(NotFound).
    nlohmann::json call_tool_result(const std::string& name, const nlohmann::json& arguments);

    bool initialized() const { return initialized_; }
    void force_initialized() { initialized_ = true; } // test harnesses only

private:
    using Handler = std::function<nlohmann::json(const nlohmann::json&)>;

    void register_tools();
    void add_tool(std::string name, std::string description, nlohmann::json schema,
                  Handler handler);
    nlohmann::json dispatch(const nlohmann::json& request);

    Bridge& bridge_;
    std::vector<ToolDescriptor> tools_;
    std::map<std::string, Handler> handlers_;
    bool initialized_ = false;
};

} // namespace mcp2osc
