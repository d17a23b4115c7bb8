#include "mcp2osc/address.hpp"
#include <algorithm>

#include "mcp2osc/error.hpp"

#include <cstring>

namespace mcp2osc {

namespace {

constexpr std::string_view kWildcardChars = "?*[]{}";

bool is_bad_char(char c)
{
    unsigned char uc = static_cast<unsigned char>(c);
    return uc < 0x20 || uc == 0x7f || c == ' ';
}

std::vector<std::string> split_segments(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t i = 1; // past the leading '/'
    while (i <= s.size()) {
        std::size_t j = s.find('/', i);
        if (j == std::string_view::npos)
            j = s.size();
        out.emplace_back(s.substr(i, j - i));
        i = j + 1;
    }
    return out;
}

// Backtracking matcher over one pre-validated segment. Alternation compares
// alternatives literally; classes support ranges and '!' negation.
bool seg_match(std::string_view p, std::string_view s, std::size_t pi, std::size_t si)
{
    while (pi < p.size()) {
        char c = p[pi];
        if (c == '?') {
            if (si == s.size())
                return false;
            ++pi;
            ++si;
        } else if (c == '*') {
            while (pi < p.size() && p[pi] == '*')
                ++pi;
            if (pi == p.size())
                return true;
            for (std::size_t k = si; k <= s.size(); ++k)
                if (seg_match(p, s, pi, k))
                    return true;
            return false;
        } else if (c == '[') {
            std::size_t q = pi + 1;
            bool negated = false;
            if (q < p.size() && p[q] == '!') {
                negated = true;
                ++q;
            }
            bool in_set = false;
            char target = si < s.size() ? s[si] : '\0';
            while (q < p.size() && p[q] != ']') {
                char lo = p[q], hi = lo;
                if (q + 2 < p.size() && p[q + 1] == '-' && p[q + 2] != ']') {
                    hi = p[q + 2];
                    q += 3;
                } else {
                    ++q;
                }
                if (target >= lo && target <= hi)
                    in_set = true;
            }
            if (si == s.size())
                return false;
            if (in_set == negated)
                return false;
            pi = q + 1;
            ++si;
        } else if (c == '{') {
            std::size_t close = p.find('}', pi);
            std::size_t alt = pi + 1;
            while (alt <= close) {
                std::size_t comma = p.find(',', alt);
                if (comma == std::string_view::npos || comma > close)
                    comma = close;
                std::size_t len = comma - alt;
                if (s.size() - si >= len && p.compare(alt, len, s, si, len) == 0)
                    if (seg_match(p, s, close + 1, si + len))
                        return true;
                alt = comma + 1;
            }
            return false;
        } else {
            if (si == s.size() || s[si] != c)
                return false;
            ++pi;
            ++si;
        }
    }
    return si == s.size();
}

void check_pattern_wellformed(std::string_view text)
{
    if (text.empty() || text[0] != '/')
        raise(ErrorKind::MalformedPattern, "pattern must begin with '/'");
    bool in_class = false, in_brace = false;
    bool brace_empty = false;
    for (char c : text) {
        if (is_bad_char(c))
            raise(ErrorKind::MalformedPattern, "pattern contains space or control character");
        if (in_class) {
            if (c == '/')
                raise(ErrorKind::MalformedPattern, "character class crosses a '/'");
            if (c == ']')
                in_class = false;
            continue;
        }
        if (in_brace) {
            if (c == '/')
                raise(ErrorKind::MalformedPattern, "alternation crosses a '/'");
            if (c == '{')
                raise(ErrorKind::MalformedPattern, "nested '{' in alternation");
            if (c == '}') {
                if (brace_empty) // only the literal "{}" group is rejected
                    raise(ErrorKind::MalformedPattern, "empty '{}' alternation");
                in_brace = false;
            } else {
                brace_empty = false;
            }
            continue;
        }
        switch (c) {
        case '[': in_class = true; break;
        case '{':
            in_brace = true;
            brace_empty = true;
            break;
        case ']': raise(ErrorKind::MalformedPattern, "']' without matching '['");
        case '}': raise(ErrorKind::MalformedPattern, "'}' without matching '{'");
        case ',': raise(ErrorKind::MalformedPattern, "',' outside an alternation");
        default: break;
        }
    }
    if (in_class)
        raise(ErrorKind::MalformedPattern, "unterminated character class");
    if (in_brace)
        raise(ErrorKind::MalformedPattern, "unterminated alternation");
}

} // namespace

AddressCheck validate_address(std::string_view text)
{
    if (text.empty())
        return {AddressKind::Invalid, "empty address"};
    if (text[0] != '/')
        return {AddressKind::Invalid, "address must begin with '/'"};
    bool has_wildcard = false;
    for (char c : text) {
        if (is_bad_char(c))
            return {AddressKind::Invalid, "address contains space or control character"};
        if (kWildcardChars.find(c) != std::string_view::npos)
            has_wildcard = true;
    }
    if (has_wildcard)
        return {AddressKind::Pattern, {}};
    for (char c : {',', '#'})
        if (text.find(c) != std::string_view::npos)
            return {AddressKind::Invalid,
                    std::string("'") + c + "' is not allowed in a concrete address"};
    return {AddressKind::Concrete, {}};
}

AddressPattern AddressPattern::parse(std::string_view text)
{
    check_pattern_wellformed(text);
    AddressPattern out;
    out.text_ = std::string(text);
    out.parts_ = split_segments(text);
    out.literal_ = text.find_first_of(kWildcardChars) == std::string_view::npos;
    return out;
}

bool match(const AddressPattern& pattern, std::string_view address)
{
    if (address.empty() || address[0] != '/')
        return false;
    if (pattern.literal())
        return pattern.text() == address;
    auto aseg = split_segments(address);
    const auto& pseg = pattern.parts();
    if (aseg.size() != pseg.size())
        return false;
    for (std::size_t k = 0; k < pseg.size(); ++k)
        if (!seg_match(pseg[k], aseg[k], 0, 0))
            return false;
    return true;
}

bool match(std::string_view pattern, std::string_view address)
{
    return match(AddressPattern::parse(pattern), address);
}

namespace {

// Collects "[name]" tokens in order of first appearance.
void scan_placeholders(std::string_view text, std::vector<std::string>& order)
{
    std::size_t i = 0;
    while ((i = text.find('[', i)) != std::string_view::npos) {
        auto close = text.find(']', i);
        if (close == std::string_view::npos)
            raise(ErrorKind::UnboundPlaceholder,
                  "unclosed '[' in template '" + std::string(text) + "'");
        std::string name(text.substr(i + 1, close - i - 1));
        if (name.empty())
            raise(ErrorKind::UnboundPlaceholder, "empty placeholder '[]' in template");
        if (std::find(order.begin(), order.end(), name) == order.end())
            order.push_back(name);
        i = close + 1;
    }
}

std::string substitute(std::string_view text, const std::map<std::string, int>& values)
{
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '[') {
            auto close = text.find(']', i);
            std::string name(text.substr(i + 1, close - i - 1));
            out += std::to_string(values.at(name));
            i = close + 1;
        } else {
            out += text[i++];
        }
    }
    return out;
}

bool passes_filter(int v, TemplateSpec::Filter f)
{
    bool odd = v % 2 != 0;
    if (f == TemplateSpec::Filter::Odd)
        return odd;
    if (f == TemplateSpec::Filter::Even)
        return !odd;
    return true;
}

} // namespace

std::vector<OscMessage> expand_template(const TemplateSpec& spec)
{
    std::vector<std::string> order;
    scan_placeholders(spec.address_template, order);
    for (const auto& arg : spec.args) {
        if (arg.kind == TemplateSpec::Arg::Kind::IntPlaceholder) {
            if (std::find(order.begin(), order.end(), arg.text) == order.end())
                order.push_back(arg.text);
        } else if (arg.kind == TemplateSpec::Arg::Kind::StrTemplate) {
            scan_placeholders(arg.text, order);
        }
    }

    std::vector<std::vector<int>> values(order.size());
    std::size_t cardinality = order.empty() ? 1 : 0;
    if (!order.empty()) {
        cardinality = 1;
        for (std::size_t k = 0; k < order.size(); ++k) {
            auto it = spec.ranges.find(order[k]);
            if (it == spec.ranges.end())
                raise(ErrorKind::UnboundPlaceholder,
                      "placeholder '[" + order[k] + "]' has no range");
            const auto& r = it->second;
            if (r.step < 1)
                raise(ErrorKind::InvalidSpec, "range step must be >= 1");
            for (long v = r.start; v <= r.end; v += r.step)
                if (passes_filter(int(v), spec.filter))
                    values[k].push_back(int(v));
            cardinality *= values[k].size();
            if (cardinality > kMaxExpansion)
                raise(ErrorKind::CardinalityExceeded,
                      "expansion would produce more than " + std::to_string(kMaxExpansion) +
                          " messages");
        }
    }

    std::vector<OscMessage> out;
    if (cardinality == 0)
        return out;
    out.reserve(cardinality);

    std::vector<std::size_t> idx(order.size(), 0);
    while (true) {
        std::map<std::string, int> current;
        for (std::size_t k = 0; k < order.size(); ++k)
            current[order[k]] = values[k][idx[k]];

        OscMessage msg;
        msg.address = substitute(spec.address_template, current);
        auto check = validate_address(msg.address);
        if (!check.concrete())
            raise(ErrorKind::InvalidAddress, "expanded address '" + msg.address +
                                                 "' is not a sendable concrete address");
        for (const auto& arg : spec.args) {
            switch (arg.kind) {
            case TemplateSpec::Arg::Kind::Literal: msg.args.push_back(arg.literal); break;
            case TemplateSpec::Arg::Kind::IntPlaceholder:
                msg.args.push_back(std::int32_t(current.at(arg.text)));
                break;
            case TemplateSpec::Arg::Kind::StrTemplate:
                msg.args.push_back(substitute(arg.text, current));
                break;
            }
        }
        out.push_back(std::move(msg));

        // odometer: last placeholder varies fastest
        std::size_t k = order.size();
        while (k > 0) {
            --k;
            if (++idx[k] < values[k].size())
                break;
            idx[k] = 0;
            if (k == 0)
                return out;
        }
        if (order.empty())
            return out;
    }
}

} // namespace mcp2osc
