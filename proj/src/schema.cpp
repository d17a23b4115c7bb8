#include "mcp2osc/schema.hpp"

#include <cmath>

namespace mcp2osc {

using nlohmann::json;

namespace {

bool type_matches(const std::string& type, const json& value)
{
    if (type == "object")
        return value.is_object();
    if (type == "array")
        return value.is_array();
    if (type == "string")
        return value.is_string();
    if (type == "boolean")
        return value.is_boolean();
    if (type == "null")
        return value.is_null();
    if (type == "number")
        return value.is_number();
    if (type == "integer") {
        if (value.is_number_integer() || value.is_number_unsigned())
            return true;
        if (value.is_number_float()) {
            double d = value.get<double>();
            return std::floor(d) == d; // 7400.0 counts as an integer
        }
        return false;
    }
    return false;
}

std::string json_type_name(const json& value)
{
    switch (value.type()) {
    case json::value_t::object: return "object";
    case json::value_t::array: return "array";
    case json::value_t::string: return "string";
    case json::value_t::boolean: return "boolean";
    case json::value_t::null: return "null";
    default: return value.is_number() ? "number" : "unknown";
    }
}

} // namespace

std::optional<std::string> schema_violation(const json& schema, const json& value,
                                            const std::string& where)
{
    if (!schema.is_object())
        return std::nullopt;

    if (schema.contains("type")) {
        const auto& t = schema["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(t.get<std::string>(), value);
        } else if (t.is_array()) {
            for (const auto& alt : t)
                ok = ok || (alt.is_string() && type_matches(alt.get<std::string>(), value));
        }
        if (!ok)
            return where + ": expected " + t.dump() + ", got " + json_type_name(value);
    }

    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& candidate : schema["enum"])
            ok = ok || candidate == value;
        if (!ok)
            return where + ": " + value.dump() + " is not one of " + schema["enum"].dump();
    }

    if (value.is_number()) {
        double d = value.get<double>();
        if (schema.contains("minimum") && d < schema["minimum"].get<double>())
            return where + ": " + value.dump() + " is below minimum " +
                   schema["minimum"].dump();
        if (schema.contains("maximum") && d > schema["maximum"].get<double>())
            return where + ": " + value.dump() + " is above maximum " +
                   schema["maximum"].dump();
    }

    if (value.is_string() && schema.contains("minLength") &&
        value.get_ref<const std::string&>().size() < schema["minLength"].get<std::size_t>())
        return where + ": string shorter than minLength " + schema["minLength"].dump();

    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& req : schema["required"]) {
                const auto& name = req.get_ref<const std::string&>();
                if (!value.contains(name))
                    return where + ": missing required property \"" + name + "\"";
            }
        const json props =
            schema.contains("properties") ? schema["properties"] : json::object();
        const json additional = schema.contains("additionalProperties")
                                    ? schema["additionalProperties"]
                                    : json(true);
        for (const auto& [key, sub] : value.items()) {
            auto it = props.find(key);
            if (it == props.end()) {
                if (additional == json(false))
                    return where + ": unexpected property \"" + key + "\"";
                if (additional.is_object())
                    if (auto v = schema_violation(additional, sub, where + "." + key))
                        return v;
                continue;
            }
            if (auto v = schema_violation(*it, sub, where + "." + key))
                return v;
        }
    }

    if (value.is_array()) {
        if (schema.contains("minItems") && value.size() < schema["minItems"].get<std::size_t>())
            return where + ": fewer than " + schema["minItems"].dump() + " item(s)";
        if (schema.contains("maxItems") && value.size() > schema["maxItems"].get<std::size_t>())
            return where + ": more than " + schema["maxItems"].dump() + " item(s)";
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < value.size(); ++i)
                if (auto v = schema_violation(schema["items"], value[i],
                                              where + "[" + std::to_string(i) + "]"))
                    return v;
        }
    }

    return std::nullopt;
}

} // namespace mcp2osc
