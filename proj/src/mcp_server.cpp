#include "mcp2osc/mcp_server.hpp"

#include "mcp2osc/address.hpp"
#include "mcp2osc/error.hpp"
#include "mcp2osc/json_convert.hpp"
#include "mcp2osc/schema.hpp"

#include <istream>
#include <ostream>

namespace mcp2osc {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxListedEntries = 1000;

json arg_item_schema()
{
    return {{"type", json::array({"object", "number", "string", "boolean"})},
            {"properties",
             {{"type",
               {{"type", "string"},
                {"enum", json::array({"i", "f", "s", "b", "T", "F", "N", "I", "t", "h", "d"})}}},
              {"value", json::object()}}},
            {"required", json::array({"type"})}};
}

json message_schema()
{
    return {{"type", "object"},
            {"properties",
             {{"address", {{"type", "string"}, {"minLength", 1}}},
              {"args", {{"type", "array"}, {"items", arg_item_schema()}}}}},
            {"required", json::array({"address"})},
            {"additionalProperties", false}};
}

json parameter_schema()
{
    return {{"type", "object"},
            {"properties",
             {{"name", {{"type", "string"}}},
              {"type", {{"type", "string"}, {"enum", json::array({"i", "f", "s", "b"})}}},
              {"min", {{"type", "number"}}},
              {"max", {{"type", "number"}}},
              {"default", json::object()},
              {"enum_values", {{"type", "array"}, {"items", {{"type", "string"}}}}}}},
            {"additionalProperties", false}};
}

json record_schema()
{
    return {{"type", "object"},
            {"properties",
             {{"address", {{"type", "string"}, {"minLength", 1}}},
              {"description", {{"type", "string"}}},
              {"parameters", {{"type", "array"}, {"items", parameter_schema()}}},
              {"category", {{"type", "string"}}},
              {"tags", {{"type", "array"}, {"items", {{"type", "string"}}}}},
              {"application", {{"type", "string"}}},
              {"created_at", {{"type", "string"}}},
              {"updated_at", {{"type", "string"}}}}},
            {"required", json::array({"address"})},
            {"additionalProperties", false}};
}

OscMessage message_from_json(const json& j, std::vector<std::string>* warnings)
{
    OscMessage m;
    m.address = j.at("address").get<std::string>();
    if (j.contains("args"))
        m.args = args_from_typed_json(j["args"], warnings);
    return m;
}

// Template arguments: "[name]" in an 'i' value is an integer placeholder,
// any 's' value may embed "[name]" tokens.
TemplateSpec::Arg template_arg_from_json(const json& j, std::vector<std::string>* warnings)
{
    if (j.is_object() && j.contains("type") && j["type"].is_string() && j.contains("value")) {
        std::string t = j["type"].get<std::string>();
        const json& v = j["value"];
        if (t == "i" && v.is_string()) {
            std::string s = v.get<std::string>();
            if (s.size() > 2 && s.front() == '[' && s.back() == ']')
                return TemplateSpec::Arg::int_placeholder(s.substr(1, s.size() - 2));
            raise(ErrorKind::UnencodableArgument,
                  "'i' argument value must be an integer or a \"[placeholder]\", got " + v.dump());
        }
        if (t == "s" && v.is_string() && v.get<std::string>().find('[') != std::string::npos)
            return TemplateSpec::Arg::str_template(v.get<std::string>());
    }
    return TemplateSpec::Arg::lit(arg_from_typed_json(j, warnings));
}

OscTimetag timetag_from_json(const json& j)
{
    if (j.is_number_unsigned() || j.is_number_integer())
        return OscTimetag::from_raw(j.get<std::uint64_t>());
    if (j.is_object())
        return {j.value("sec", std::uint32_t(0)), j.value("frac", std::uint32_t(0))};
    raise(ErrorKind::UnencodableArgument, "timetag must be a raw integer or {sec,frac}");
}

json entry_list_json(const std::vector<LogEntry>& entries)
{
    json out = json::object();
    out["count"] = entries.size();
    out["truncated"] = entries.size() > kMaxListedEntries;
    json list = json::array();
    std::size_t n = std::min(entries.size(), kMaxListedEntries);
    for (std::size_t i = 0; i < n; ++i)
        list.push_back(log_entry_to_json(entries[i]));
    out["entries"] = std::move(list);
    return out;
}

json id_or_null(const json& request)
{
    return request.is_object() && request.contains("id") ? request["id"] : json();
}

json error_response(const json& id, int code, const std::string& message)
{
    return {{"jsonrpc", "2.0"}, {"id", id}, {"error", {{"code", code}, {"message", message}}}};
}

json result_response(const json& id, json result)
{
    return {{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

} // namespace

McpServer::McpServer(Bridge& bridge) : bridge_(bridge)
{
    register_tools();
}

void McpServer::add_tool(std::string name, std::string description, json schema, Handler handler)
{
    tools_.push_back({name, std::move(description), std::move(schema)});
    handlers_[std::move(name)] = std::move(handler);
}

void McpServer::register_tools()
{
    json dest_prop = {{"type", "string"},
                      {"description", "host:port override of the configured send target"}};
    json override_prop = {{"type", "boolean"},
                          {"description", "send even if stored-pattern validation reports violations"}};

    add_tool(
        "send_message", "Send one OSC message over UDP. Arguments are typed "
        "{type,value} objects (types i f s b T F N I t); bare numbers/strings are "
        "inferred with a warning. Validated against stored patterns first.",
        {{"type", "object"},
         {"properties",
          {{"address", {{"type", "string"}, {"minLength", 1}}},
           {"args", {{"type", "array"}, {"items", arg_item_schema()}}},
           {"dest", dest_prop},
           {"override_validation", override_prop}}},
         {"required", json::array({"address"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            BatchOptions opts;
            opts.as_bundle = false;
            opts.override_validation = a.value("override_validation", false);
            if (a.contains("dest"))
                opts.dest = a["dest"].get<std::string>();
            std::vector<std::string> warnings;
            auto msg = message_from_json(a, &warnings);
            auto report = bridge_.control().send_batch({msg}, opts);
            report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
            json out = report.to_json();
            out["address"] = msg.address;
            return out;
        });

    add_tool(
        "send_bundle", "Send several OSC messages atomically. as_bundle=true (default) "
        "packs them into the fewest IMMEDIATE-tagged bundles that fit the datagram "
        "limit, preserving order; as_bundle=false sends them individually.",
        {{"type", "object"},
         {"properties",
          {{"messages", {{"type", "array"}, {"items", message_schema()}}},
           {"as_bundle", {{"type", "boolean"}}},
           {"timetag",
            {{"type", json::array({"integer", "object"})},
             {"description", "accepted but dispatched immediately with a warning"}}},
           {"dest", dest_prop},
           {"override_validation", override_prop}}},
         {"required", json::array({"messages"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            BatchOptions opts;
            opts.as_bundle = a.value("as_bundle", true);
            opts.override_validation = a.value("override_validation", false);
            if (a.contains("dest"))
                opts.dest = a["dest"].get<std::string>();
            if (a.contains("timetag"))
                opts.requested_timetag = timetag_from_json(a["timetag"]);
            std::vector<std::string> warnings;
            std::vector<OscMessage> msgs;
            for (const auto& mj : a["messages"])
                msgs.push_back(message_from_json(mj, &warnings));
            auto report = bridge_.control().send_batch(msgs, opts);
            report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
            return report.to_json();
        });

    add_tool(
        "expand_and_send", "Expand a \"[name]\" placeholder template over integer "
        "ranges (with an optional odd/even filter) and send the batch; preview=true "
        "returns the messages without touching the wire. Example: template "
        "\"/ch/[channel]/mute\", ranges {\"channel\":{\"start\":1,\"end\":100}}, "
        "filter \"odd\", args [{\"type\":\"i\",\"value\":1}].",
        {{"type", "object"},
         {"properties",
          {{"template", {{"type", "string"}, {"minLength", 1}}},
           {"ranges",
            {{"type", "object"},
             {"additionalProperties",
              {{"type", "object"},
               {"properties",
                {{"start", {{"type", "integer"}}},
                 {"end", {{"type", "integer"}}},
                 {"step", {{"type", "integer"}, {"minimum", 1}}}}},
               {"required", json::array({"start", "end"})},
               {"additionalProperties", false}}}}},
           {"filter", {{"type", "string"}, {"enum", json::array({"none", "odd", "even"})}}},
           {"args", {{"type", "array"}, {"items", arg_item_schema()}}},
           {"preview", {{"type", "boolean"}}},
           {"as_bundle", {{"type", "boolean"}}},
           {"dest", dest_prop},
           {"override_validation", override_prop}}},
         {"required", json::array({"template", "ranges"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            TemplateSpec spec;
            spec.address_template = a["template"].get<std::string>();
            for (const auto& [name, r] : a["ranges"].items())
                spec.ranges[name] = {r["start"].get<int>(), r["end"].get<int>(),
                                     r.value("step", 1)};
            std::string filter = a.value("filter", "none");
            spec.filter = filter == "odd"    ? TemplateSpec::Filter::Odd
                          : filter == "even" ? TemplateSpec::Filter::Even
                                             : TemplateSpec::Filter::None;
            std::vector<std::string> warnings;
            if (a.contains("args"))
                for (const auto& aj : a["args"])
                    spec.args.push_back(template_arg_from_json(aj, &warnings));

            auto messages = expand_template(spec);
            json out = json::object();
            out["count"] = messages.size();
            if (a.value("preview", false)) {
                out["preview"] = true;
                json list = json::array();
                std::size_t n = std::min(messages.size(), kMaxListedEntries);
                for (std::size_t i = 0; i < n; ++i)
                    list.push_back({{"address", messages[i].address},
                                    {"args", args_to_typed_json(messages[i].args)}});
                out["truncated"] = messages.size() > kMaxListedEntries;
                out["messages"] = std::move(list);
                out["warnings"] = warnings;
                return out;
            }
            BatchOptions opts;
            opts.as_bundle = a.value("as_bundle", true);
            opts.override_validation = a.value("override_validation", false);
            if (a.contains("dest"))
                opts.dest = a["dest"].get<std::string>();
            auto report = bridge_.control().send_batch(messages, opts);
            report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
            out.update(report.to_json());
            if (!messages.empty()) {
                out["first_address"] = messages.front().address;
                out["last_address"] = messages.back().address;
            }
            return out;
        });

    add_tool(
        "start_stream", "Start a timed continuous-control ramp: messages at rate_hz "
        "(default 50) interpolating one float from start_value to end_value over "
        "duration_s with the given shape (linear, exponential, ease-in-out). Returns "
        "a stream_id for stop_stream.",
        {{"type", "object"},
         {"properties",
          {{"address", {{"type", "string"}, {"minLength", 1}}},
           {"start_value", {{"type", "number"}}},
           {"end_value", {{"type", "number"}}},
           {"duration_s", {{"type", "number"}, {"minimum", 0}, {"maximum", 600}}},
           {"rate_hz", {{"type", "number"}, {"minimum", 1}, {"maximum", 200}}},
           {"shape",
            {{"type", "string"}, {"enum", json::array({"linear", "exponential", "ease-in-out"})}}},
           {"dest", dest_prop}}},
         {"required", json::array({"address", "start_value", "end_value", "duration_s"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            StreamSpec spec;
            spec.address = a["address"].get<std::string>();
            spec.start_value = a["start_value"].get<float>();
            spec.end_value = a["end_value"].get<float>();
            spec.duration_s = a["duration_s"].get<double>();
            spec.rate_hz = a.value("rate_hz", 50.0);
            if (a.contains("shape")) {
                auto shape = stream_shape_from_string(a["shape"].get<std::string>());
                spec.shape = *shape; // enum-checked by the schema
            }
            if (a.contains("dest"))
                spec.dest = a["dest"].get<std::string>();
            int id = bridge_.control().start_stream(spec);
            return json{{"stream_id", id},
                        {"planned_messages", ControlOps::planned_stream_messages(spec)},
                        {"rate_hz", spec.rate_hz},
                        {"duration_s", spec.duration_s}};
        });

    add_tool("stop_stream", "Stop a running stream early (idempotent) and report how many "
             "messages went out.",
             {{"type", "object"},
              {"properties", {{"stream_id", {{"type", "integer"}}}}},
              {"required", json::array({"stream_id"})},
              {"additionalProperties", false}},
             [this](const json& a) {
                 return bridge_.control().stop_stream(a["stream_id"].get<int>()).to_json();
             });

    add_tool(
        "get_received", "List logged OSC traffic from the last window_s seconds, "
        "optionally filtered by an address pattern (e.g. \"/robot/*/position\") and "
        "direction (\"in\"/\"out\").",
        {{"type", "object"},
         {"properties",
          {{"window_s", {{"type", "number"}, {"minimum", 0}}},
           {"filter", {{"type", "string"}}},
           {"direction", {{"type", "string"}, {"enum", json::array({"in", "out"})}}}}},
         {"required", json::array({"window_s"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            std::optional<std::string> filter;
            if (a.contains("filter"))
                filter = a["filter"].get<std::string>();
            std::optional<Direction> dir;
            if (a.contains("direction"))
                dir = a["direction"] == "in" ? Direction::In : Direction::Out;
            return entry_list_json(
                bridge_.log().query_window(a["window_s"].get<double>(), filter, dir));
        });

    add_tool("get_stats", "Activity summary for the last window_s seconds: totals, "
             "per-address counts, distinct endpoints, first/last timestamps, rate.",
             {{"type", "object"},
              {"properties", {{"window_s", {{"type", "number"}, {"minimum", 0}}}}},
              {"required", json::array({"window_s"})},
              {"additionalProperties", false}},
             [this](const json& a) {
                 return bridge_.log().stats(a["window_s"].get<double>()).to_json();
             });

    add_tool(
        "export_log", "Export the last window_s seconds of traffic as data: \"jsonl\" "
        "(one log record per line) or \"csv\" (seq,direction,wall_time,endpoint,"
        "address,args), e.g. for plotting or anomaly hunting.",
        {{"type", "object"},
         {"properties",
          {{"window_s", {{"type", "number"}, {"minimum", 0}}},
           {"format", {{"type", "string"}, {"enum", json::array({"jsonl", "csv"})}}}}},
         {"required", json::array({"window_s", "format"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            auto fmt = a["format"] == "csv" ? ExportFormat::Csv : ExportFormat::Jsonl;
            double window = a["window_s"].get<double>();
            json out = json::object();
            out["format"] = a["format"];
            out["entries"] = bridge_.log().query_window(window).size();
            out["data"] = bridge_.log().export_window(window, fmt);
            return out;
        });

    add_tool(
        "save_patterns", "Save OSC address patterns with metadata (description, typed "
        "parameters with ranges, category, tags, application). Upserts by address.",
        {{"type", "object"},
         {"properties",
          {{"patterns", {{"type", "array"}, {"items", record_schema()}, {"minItems", 1}}}}},
         {"required", json::array({"patterns"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            std::vector<PatternRecord> records;
            for (const auto& rj : a["patterns"])
                records.push_back(record_from_json(rj));
            auto outcomes = bridge_.patterns().save_patterns(records);
            json out = json::object();
            out["saved"] = outcomes.size();
            json list = json::array();
            for (const auto& o : outcomes)
                list.push_back({{"address", o.address},
                                {"outcome", o.inserted ? "inserted" : "updated"}});
            out["outcomes"] = std::move(list);
            out["store_size"] = bridge_.patterns().size();
            return out;
        });

    add_tool(
        "list_patterns", "List stored OSC patterns, filtered by category, tag, "
        "application, free-text query (address/description/tags), and/or an address "
        "pattern. Results are grouped by category.",
        {{"type", "object"},
         {"properties",
          {{"category", {{"type", "string"}}},
           {"tag", {{"type", "string"}}},
           {"application", {{"type", "string"}}},
           {"text", {{"type", "string"}}},
           {"address_pattern", {{"type", "string"}}}}},
         {"additionalProperties", false}},
        [this](const json& a) {
            PatternFilter f;
            if (a.contains("category"))
                f.category = a["category"].get<std::string>();
            if (a.contains("tag"))
                f.tag = a["tag"].get<std::string>();
            if (a.contains("application"))
                f.application = a["application"].get<std::string>();
            if (a.contains("text"))
                f.text = a["text"].get<std::string>();
            if (a.contains("address_pattern"))
                f.address_pattern = a["address_pattern"].get<std::string>();
            auto records = bridge_.patterns().list_patterns(f);
            json out = json::object();
            out["count"] = records.size();
            json list = json::array();
            for (const auto& r : records)
                list.push_back(record_to_json(r));
            out["patterns"] = std::move(list);
            return out;
        });

    add_tool(
        "update_pattern", "Update a stored pattern: merge description/category/"
        "application/tags/parameters, set min/max on the first parameter, and/or "
        "rename via new_address or address_suffix (appends a path segment).",
        {{"type", "object"},
         {"properties",
          {{"address", {{"type", "string"}, {"minLength", 1}}},
           {"changes",
            {{"type", "object"},
             {"properties",
              {{"description", {{"type", "string"}}},
               {"category", {{"type", "string"}}},
               {"application", {{"type", "string"}}},
               {"tags", {{"type", "array"}, {"items", {{"type", "string"}}}}},
               {"parameters", {{"type", "array"}, {"items", parameter_schema()}}},
               {"min", {{"type", "number"}}},
               {"max", {{"type", "number"}}},
               {"new_address", {{"type", "string"}}},
               {"address_suffix", {{"type", "string"}}}}},
             {"additionalProperties", false}}}}},
         {"required", json::array({"address", "changes"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            const json& c = a["changes"];
            UpdateChanges changes;
            if (c.contains("description"))
                changes.description = c["description"].get<std::string>();
            if (c.contains("category"))
                changes.category = c["category"].get<std::string>();
            if (c.contains("application"))
                changes.application = c["application"].get<std::string>();
            if (c.contains("tags"))
                changes.tags = c["tags"].get<std::vector<std::string>>();
            if (c.contains("parameters")) {
                std::vector<ParameterSpec> params;
                for (const auto& pj : c["parameters"])
                    params.push_back(parameter_from_json(pj));
                changes.parameters = std::move(params);
            }
            if (c.contains("min"))
                changes.min = c["min"].get<double>();
            if (c.contains("max"))
                changes.max = c["max"].get<double>();
            if (c.contains("new_address"))
                changes.new_address = c["new_address"].get<std::string>();
            if (c.contains("address_suffix"))
                changes.address_suffix = c["address_suffix"].get<std::string>();
            auto updated =
                bridge_.patterns().update_pattern(a["address"].get<std::string>(), changes);
            return json{{"updated", record_to_json(updated)}};
        });

    add_tool("delete_pattern", "Delete a stored pattern by address.",
             {{"type", "object"},
              {"properties", {{"address", {{"type", "string"}, {"minLength", 1}}}}},
              {"required", json::array({"address"})},
              {"additionalProperties", false}},
             [this](const json& a) {
                 auto address = a["address"].get<std::string>();
                 bridge_.patterns().delete_pattern(address);
                 return json{{"deleted", address}, {"remaining", bridge_.patterns().size()}};
             });

    add_tool(
        "run_bidirectional_test", "Validate bidirectional OSC communication: send "
        "\"/mcp2osc/ping\" with a fresh nonce and wait for the peer to answer on "
        "\"/mcp2osc/pong\". A failed probe is a successful tool call with outcome "
        "\"fail\".",
        {{"type", "object"},
         {"properties",
          {{"timeout_ms", {{"type", "integer"}, {"minimum", 1}, {"maximum", 60000}}},
           {"probe", {{"type", "string"}}}}},
         {"required", json::array({"timeout_ms"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            return bridge_.control()
                .run_bidirectional_test(a["timeout_ms"].get<int>(),
                                        a.value("probe", "/mcp2osc/ping"))
                .to_json();
        });

    add_tool(
        "discover_namespace", "Query an OSCQuery-capable peer over HTTP and return "
        "its OSC namespace tree (paths, type signatures, values, descriptions).",
        {{"type", "object"},
         {"properties",
          {{"host", {{"type", "string"}, {"minLength", 1}}},
           {"port", {{"type", "integer"}, {"minimum", 1}, {"maximum", 65535}}},
           {"path", {{"type", "string"}}}}},
         {"required", json::array({"host", "port"})},
         {"additionalProperties", false}},
        [this](const json& a) {
            auto tree = bridge_.control().discover_namespace(
                a["host"].get<std::string>(), a["port"].get<int>(), a.value("path", "/"));
            return json{{"namespace", tree.to_json()}, {"leaves", tree.leaf_count()}};
        });
}

json McpServer::call_tool_result(const std::string& name, const json& arguments)
{
    auto handler = handlers_.find(name);
    if (handler == handlers_.end())
        raise(ErrorKind::NotFound, "unknown tool \"" + name + "\"");
    const ToolDescriptor* descriptor = nullptr;
    for (const auto& t : tools_)
        if (t.name == name)
            descriptor = &t;
    if (auto violation = schema_violation(descriptor->input_schema, arguments))
        raise(ErrorKind::InvalidSpec, *violation);

    json result = json::object();
    try {
        json value = handler->second(arguments);
        result["content"] =
            json::array({{{"type", "text"}, {"text", value.dump(2)}}});
        result["structuredContent"] = std::move(value);
        result["isError"] = false;
    } catch (const Error& e) {
        json detail = {{"error", {{"kind", e.kind_name()}, {"message", e.message()}}}};
        result["content"] = json::array(
            {{{"type", "text"}, {"text", std::string(e.kind_name()) + ": " + e.message()}}});
        result["structuredContent"] = std::move(detail);
        result["isError"] = true;
    } catch (const std::exception& e) {
        json detail = {{"error", {{"kind", "Internal"}, {"message", e.what()}}}};
        result["content"] =
            json::array({{{"type", "text"}, {"text", std::string("Internal: ") + e.what()}}});
        result["structuredContent"] = std::move(detail);
        result["isError"] = true;
    }
    return result;
}

json McpServer::dispatch(const json& request)
{
    json id = id_or_null(request);
    bool is_notification = !request.contains("id");

    if (!request.contains("method") || !request["method"].is_string()) {
        if (is_notification)
            return json(); // nothing to answer
        return error_response(id, kInvalidRequest, "request has no method");
    }
    std::string method = request["method"].get<std::string>();
    json params = request.value("params", json::object());

    if (method == "initialize") {
        initialized_ = true;
        json result = {{"protocolVersion", kProtocolVersion},
                       {"capabilities", {{"tools", json::object()}}},
                       {"serverInfo", {{"name", kServerName}, {"version", kServerVersion}}}};
        return is_notification ? json() : result_response(id, result);
    }
    if (method == "ping")
        return is_notification ? json() : result_response(id, json::object());
    if (method.rfind("notifications/", 0) == 0)
        return json();

    if (method == "tools/list" || method == "tools/call") {
        if (!initialized_) {
            if (is_notification)
                return json();
            return error_response(id, kServerNotInitialized,
                                  "server not initialized: call initialize first");
        }
    }

    if (method == "tools/list") {
        json list = json::array();
        for (const auto& t : tools_)
            list.push_back({{"name", t.name},
                            {"description", t.description},
                            {"inputSchema", t.input_schema}});
        return is_notification ? json() : result_response(id, json{{"tools", list}});
    }

    if (method == "tools/call") {
        if (!params.is_object() || !params.contains("name") || !params["name"].is_string())
            return is_notification
                       ? json()
                       : error_response(id, kInvalidParams, "tools/call needs a string name");
        std::string name = params["name"].get<std::string>();
        json arguments = params.value("arguments", json::object());
        if (is_notification)
            return json(); // tools are never executed without a reply channel
        try {
            return result_response(id, call_tool_result(name, arguments));
        } catch (const Error& e) {
            // unknown tool / schema violation are protocol-level complaints
            return error_response(id, kInvalidParams, e.what());
        } catch (const std::exception& e) {
            return error_response(id, kInvalidParams, e.what());
        }
    }

    if (is_notification)
        return json();
    return error_response(id, kMethodNotFound, "unknown method \"" + method + "\"");
}

std::optional<std::string> McpServer::handle_line(const std::string& line)
{
    std::string_view trimmed(line);
    while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' '))
        trimmed.remove_suffix(1);
    while (!trimmed.empty() && trimmed.front() == ' ')
        trimmed.remove_prefix(1);
    if (trimmed.empty())
        return std::nullopt;

    json request = json::parse(trimmed, nullptr, false);
    if (request.is_discarded())
        return error_response(json(), kParseError, "input is not valid JSON").dump();
    if (!request.is_object())
        return error_response(json(), kInvalidRequest, "request must be a JSON object").dump();

    json response;
    try {
        response = dispatch(request);
    } catch (const std::exception& e) {
        response = error_response(id_or_null(request), kInvalidRequest, e.what());
    }
    if (response.is_null())
        return std::nullopt;
    return response.dump();
}

void McpServer::serve(std::istream& in, std::ostream& out)
{
    std::string line;
    while (std::getline(in, line)) {
        auto response = handle_line(line);
        if (response) {
            out << *response << '\n';
            out.flush();
        }
    }
}

} // namespace mcp2osc
