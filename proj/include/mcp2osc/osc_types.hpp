#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mcp2osc {

// 64-bit NTP timestamp: seconds since 1900-01-01 plus a 1/2^32 s fraction.
// The raw value 1 (seconds=0, fraction=1) is the distinguished IMMEDIATE tag.
struct OscTimetag {
    std::uint32_t seconds = 0;
    std::uint32_t fraction = 0;

    static constexpr OscTimetag immediate() { return {0, 1}; }
    bool is_immediate() const { return seconds == 0 && fraction == 1; }

    std::uint64_t raw() const { return (std::uint64_t(seconds) << 32) | fraction; }
    static OscTimetag from_raw(std::uint64_t v)
    {
        return {std::uint32_t(v >> 32), std::uint32_t(v & 0xffffffffu)};
    }

    friend bool operator==(const OscTimetag&, const OscTimetag&) = default;
};

using OscBlob = std::vector<std::uint8_t>;

// Payload-less argument kinds, one per type-tag character.
struct OscTrue {
    friend bool operator==(const OscTrue&, const OscTrue&) = default;
};
struct OscFalse {
    friend bool operator==(const OscFalse&, const OscFalse&) = default;
};
struct OscNil {
    friend bool operator==(const OscNil&, const OscNil&) = default;
};
struct OscImpulse {
    friend bool operator==(const OscImpulse&, const OscImpulse&) = default;
};

// Tag mapping: i f s b T F N I t, plus h/d which only enter via decode and
// re-encode losslessly.
using OscArgument = std::variant<std::int32_t,  // i
                                 float,         // f
                                 std::string,   // s
                                 OscBlob,       // b
                                 OscTrue,       // T
                                 OscFalse,      // F
                                 OscNil,        // N
                                 OscImpulse,    // I
                                 OscTimetag,    // t
                                 std::int64_t,  // h
                                 double>;       // d

char type_tag(const OscArgument& arg);

// Type-tag signature without the leading comma, e.g. "if".
std::string type_tags(const std::vector<OscArgument>& args);

struct OscPacket;

struct OscMessage {
    std::string address;
    std::vector<OscArgument> args;
};

struct OscBundle {
    OscTimetag timetag = OscTimetag::immediate();
    std::vector<OscPacket> elements;
};

struct OscPacket {
    std::variant<OscMessage, OscBundle> value;

    OscPacket() : value(OscMessage{}) {}
    OscPacket(OscMessage m) : value(std::move(m)) {}
    OscPacket(OscBundle b) : value(std::move(b)) {}

    bool is_message() const { return std::holds_alternative<OscMessage>(value); }
    bool is_bundle() const { return std::holds_alternative<OscBundle>(value); }
    const OscMessage& message() const { return std::get<OscMessage>(value); }
    const OscBundle& bundle() const { return std::get<OscBundle>(value); }
};

// Structural equality with floats and doubles compared by bit pattern, so a
// roundtrip through the wire can be checked exactly (NaN-safe, -0.0 != 0.0).
bool bit_exact_equal(const OscArgument& a, const OscArgument& b);
bool bit_exact_equal(const OscMessage& a, const OscMessage& b);
bool bit_exact_equal(const OscBundle& a, const OscBundle& b);
bool bit_exact_equal(const OscPacket& a, const OscPacket& b);

// Human-readable forms used by CSV export and the peer sink printer.
std::string to_display(const OscArgument& arg);
std::string to_display(const OscMessage& msg);

} // namespace mcp2osc
