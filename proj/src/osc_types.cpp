#include "mcp2osc/osc_types.hpp"

#include <bit>
#include <charconv>
#include <cstdio>

namespace mcp2osc {

char type_tag(const OscArgument& arg)
{
    struct Visitor {
        char operator()(std::int32_t) const { return 'i'; }
        char operator()(float) const { return 'f'; }
        char operator()(const std::string&) const { return 's'; }
        char operator()(const OscBlob&) const { return 'b'; }
        char operator()(OscTrue) const { return 'T'; }
        char operator()(OscFalse) const { return 'F'; }
        char operator()(OscNil) const { return 'N'; }
        char operator()(OscImpulse) const { return 'I'; }
        char operator()(const OscTimetag&) const { return 't'; }
        char operator()(std::int64_t) const { return 'h'; }
        char operator()(double) const { return 'd'; }
    };
    return std::visit(Visitor{}, arg);
}

std::string type_tags(const std::vector<OscArgument>& args)
{
    std::string tags;
    tags.reserve(args.size());
    for (const auto& a : args)
        tags.push_back(type_tag(a));
    return tags;
}

bool bit_exact_equal(const OscArgument& a, const OscArgument& b)
{
    if (a.index() != b.index())
        return false;
    if (const auto* fa = std::get_if<float>(&a))
        return std::bit_cast<std::uint32_t>(*fa) == std::bit_cast<std::uint32_t>(std::get<float>(b));
    if (const auto* da = std::get_if<double>(&a))
        return std::bit_cast<std::uint64_t>(*da) == std::bit_cast<std::uint64_t>(std::get<double>(b));
    return a == b;
}

bool bit_exact_equal(const OscMessage& a, const OscMessage& b)
{
    if (a.address != b.address || a.args.size() != b.args.size())
        return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!bit_exact_equal(a.args[i], b.args[i]))
            return false;
    return true;
}

bool bit_exact_equal(const OscBundle& a, const OscBundle& b)
{
    if (!(a.timetag == b.timetag) || a.elements.size() != b.elements.size())
        return false;
    for (std::size_t i = 0; i < a.elements.size(); ++i)
        if (!bit_exact_equal(a.elements[i], b.elements[i]))
            return false;
    return true;
}

bool bit_exact_equal(const OscPacket& a, const OscPacket& b)
{
    if (a.value.index() != b.value.index())
        return false;
    if (a.is_message())
        return bit_exact_equal(a.message(), b.message());
    return bit_exact_equal(a.bundle(), b.bundle());
}

namespace {

std::string float_text(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string float_text(float v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string to_display(const OscArgument& arg)
{
    struct Visitor {
        std::string operator()(std::int32_t v) const { return std::to_string(v); }
        std::string operator()(float v) const { return float_text(v); }
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(const OscBlob& v) const
        {
            return "blob(" + std::to_string(v.size()) + "B)";
        }
        std::string operator()(OscTrue) const { return "true"; }
        std::string operator()(OscFalse) const { return "false"; }
        std::string operator()(OscNil) const { return "nil"; }
        std::string operator()(OscImpulse) const { return "impulse"; }
        std::string operator()(const OscTimetag& v) const { return std::to_string(v.raw()); }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return float_text(v); }
    };
    return std::visit(Visitor{}, arg);
}

std::string to_display(const OscMessage& msg)
{
    std::string out = msg.address;
    for (const auto& a : msg.args) {
        out += ' ';
        out += to_display(a);
    }
    return out;
}

} // namespace mcp2osc
