#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mcp2osc/osc_types.hpp"

namespace mcp2osc {

enum class AddressKind { Concrete, Pattern, Invalid };

struct AddressCheck {
    AddressKind kind = AddressKind::Invalid;
    std::string reason; // set when invalid

    bool concrete() const { return kind == AddressKind::Concrete; }
    bool pattern() const { return kind == AddressKind::Pattern; }
    bool invalid() const { return kind == AddressKind::Invalid; }
};

// Classifies an address: concrete (sendable), pattern (contains ? * [ ] { }),
// or invalid with a reason.
AddressCheck validate_address(std::string_view text);

// A validated, pre-split OSC address pattern.
class AddressPattern {
public:
    // Throws Error(MalformedPattern) on unbalanced [] / {} or empty {}.
    static AddressPattern parse(std::string_view text);

    const std::string& text() const { return text_; }
    const std::vector<std::string>& parts() const { return parts_; }
    bool literal() const { return literal_; } // no pattern characters at all

private:
    std::string text_;
    std::vector<std::string> parts_;
    bool literal_ = true;
};

// Segment-wise matching: '?' one char, '*' any run within a segment (never
// across '/'), '[a-z]'/'[!...]' char classes, '{foo,bar}' alternation.
// Segment counts must be equal.
bool match(const AddressPattern& pattern, std::string_view address);
bool match(std::string_view pattern, std::string_view address);

inline constexpr std::size_t kMaxExpansion = 100000;

struct TemplateSpec {
    struct Range {
        int start = 0;
        int end = 0; // inclusive
        int step = 1;
    };

    enum class Filter { None, Odd, Even };

    // Template arguments: a literal OSC argument, an integer placeholder
    // ("[ch]" in an Int32 position), or a string with embedded placeholders.
    struct Arg {
        enum class Kind { Literal, IntPlaceholder, StrTemplate };
        Kind kind = Kind::Literal;
        OscArgument literal{};
        std::string text;

        static Arg lit(OscArgument a)
        {
            Arg out;
            out.kind = Kind::Literal;
            out.literal = std::move(a);
            return out;
        }
        static Arg int_placeholder(std::string name)
        {
            Arg out;
            out.kind = Kind::IntPlaceholder;
            out.text = std::move(name);
            return out;
        }
        static Arg str_template(std::string text)
        {
            Arg out;
            out.kind = Kind::StrTemplate;
            out.text = std::move(text);
            return out;
        }
    };

    std::string address_template;
    std::map<std::string, Range> ranges; // keyed by placeholder name
    Filter filter = Filter::None;
    std::vector<Arg> args;
};

// Cartesian expansion over the ranges of all referenced placeholders, filter
// applied to each range first. Placeholders iterate in order of first
// appearance (address, then args); the last one varies fastest.
std::vector<OscMessage> expand_template(const TemplateSpec& spec);

} // namespace mcp2osc
