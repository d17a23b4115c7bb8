#include "mcp2osc/json_convert.hpp"

#include "mcp2osc/error.hpp"
#include "mcp2osc/util.hpp"

#include <cmath>

namespace mcp2osc {

namespace {

[[noreturn]] void bad_arg(const std::string& why)
{
    raise(ErrorKind::UnencodableArgument, why);
}

std::int64_t require_integer(const json& v, const char* what)
{
    if (v.is_number_integer() || v.is_number_unsigned())
        return v.get<std::int64_t>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::floor(d) == d)
            return std::int64_t(d);
    }
    bad_arg(std::string(what) + " requires an integer value, got " + v.dump());
}

} // namespace

json arg_to_typed_json(const OscArgument& arg)
{
    json out = json::object();
    out["type"] = std::string(1, type_tag(arg));
    out["value"] = arg_to_plain_json(arg);
    return out;
}

OscArgument arg_from_typed_json(const json& value, std::vector<std::string>* warnings)
{
    auto warn = [&](const std::string& w) {
        if (warnings)
            warnings->push_back(w);
    };

    if (value.is_object()) {
        if (!value.contains("type") || !value["type"].is_string())
            bad_arg("typed argument needs a string \"type\": " + value.dump());
        std::string t = value["type"].get<std::string>();
        if (t.size() != 1)
            bad_arg("unknown argument type \"" + t + "\"");
        char tag = t[0];
        // payload-less tags may omit "value"
        json v = value.contains("value") ? value["value"] : json();
        if (tag == 't' && v.is_object()) {
            // {"sec":..,"frac":..} alternative spelling
            OscTimetag tt{std::uint32_t(require_integer(v.value("sec", json(0)), "timetag sec")),
                          std::uint32_t(require_integer(v.value("frac", json(0)), "timetag frac"))};
            return tt;
        }
        return arg_from_plain_json(tag, v);
    }
    if (value.is_number_integer() || value.is_number_unsigned()) {
        auto n = value.get<std::int64_t>();
        if (n < INT32_MIN || n > INT32_MAX)
            bad_arg("bare integer " + value.dump() + " does not fit in int32; use {\"type\":\"h\"}");
        warn("bare number " + value.dump() + " inferred as int32 'i'");
        return std::int32_t(n);
    }
    if (value.is_number_float()) {
        warn("bare number " + value.dump() + " inferred as float 'f'");
        return float(value.get<double>());
    }
    if (value.is_string()) {
        warn("bare string " + value.dump() + " inferred as 's'");
        return value.get<std::string>();
    }
    if (value.is_boolean()) {
        warn("bare boolean inferred as 'T'/'F'");
        if (value.get<bool>())
            return OscTrue{};
        return OscFalse{};
    }
    bad_arg("cannot interpret " + value.dump() + " as an OSC argument");
}

json args_to_typed_json(const std::vector<OscArgument>& args)
{
    json out = json::array();
    for (const auto& a : args)
        out.push_back(arg_to_typed_json(a));
    return out;
}

std::vector<OscArgument> args_from_typed_json(const json& array,
                                              std::vector<std::string>* warnings)
{
    if (!array.is_array())
        bad_arg("arguments must be an array, got " + array.dump());
    std::vector<OscArgument> out;
    out.reserve(array.size());
    for (const auto& v : array)
        out.push_back(arg_from_typed_json(v, warnings));
    return out;
}

json arg_to_plain_json(const OscArgument& arg)
{
    struct Visitor {
        json operator()(std::int32_t v) const { return v; }
        json operator()(float v) const
        {
            // keep the bit pattern through JSON for non-finite values
            if (std::isnan(v))
                return "nan";
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            return double(v);
        }
        json operator()(const std::string& v) const { return v; }
        json operator()(const OscBlob& v) const { return base64_encode(v); }
        json operator()(OscTrue) const { return true; }
        json operator()(OscFalse) const { return false; }
        json operator()(OscNil) const { return nullptr; }
        json operator()(OscImpulse) const { return nullptr; }
        json operator()(const OscTimetag& v) const { return v.raw(); }
        json operator()(std::int64_t v) const { return v; }
        json operator()(double v) const
        {
            if (std::isnan(v))
                return "nan";
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            return v;
        }
    };
    return std::visit(Visitor{}, arg);
}

namespace {

double number_or_special(const json& v, const char* what)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "nan")
            return std::nan("");
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
    }
    bad_arg(std::string(what) + " requires a number, got " + v.dump());
}

} // namespace

OscArgument arg_from_plain_json(char tag, const json& value)
{
    switch (tag) {
    case 'i': {
        auto n = require_integer(value, "'i'");
        if (n < INT32_MIN || n > INT32_MAX)
            bad_arg("'i' value out of int32 range: " + value.dump());
        return std::int32_t(n);
    }
    case 'f': return float(number_or_special(value, "'f'"));
    case 's':
        if (!value.is_string())
            bad_arg("'s' requires a string, got " + value.dump());
        return value.get<std::string>();
    case 'b': {
        if (!value.is_string())
            bad_arg("'b' requires a base64 string, got " + value.dump());
        auto bytes = base64_decode(value.get_ref<const std::string&>());
        if (!bytes)
            bad_arg("'b' value is not valid base64");
        return OscBlob(std::move(*bytes));
    }
    case 'T': return OscTrue{};
    case 'F': return OscFalse{};
    case 'N': return OscNil{};
    case 'I': return OscImpulse{};
    case 't': {
        if (value.is_number_unsigned() || value.is_number_integer())
            return OscTimetag::from_raw(value.get<std::uint64_t>());
        bad_arg("'t' requires the raw 64-bit timetag, got " + value.dump());
    }
    case 'h': return std::int64_t(require_integer(value, "'h'"));
    case 'd': return number_or_special(value, "'d'");
    default: bad_arg(std::string("unknown type tag '") + tag + "'");
    }
}

json args_to_plain_json(const std::vector<OscArgument>& args)
{
    json out = json::array();
    for (const auto& a : args)
        out.push_back(arg_to_plain_json(a));
    return out;
}

std::vector<OscArgument> args_from_plain_json(const std::string& tags, const json& array)
{
    if (!array.is_array() || array.size() != tags.size())
        bad_arg("argument array does not match tag string \"" + tags + "\"");
    std::vector<OscArgument> out;
    out.reserve(tags.size());
    for (std::size_t i = 0; i < tags.size(); ++i)
        out.push_back(arg_from_plain_json(tags[i], array[i]));
    return out;
}

} // namespace mcp2osc
