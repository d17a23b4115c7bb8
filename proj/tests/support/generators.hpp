// Deterministic random generators for property-style tests.
#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include "mcp2osc/osc_types.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) // inclusive
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline std::string concrete_address(Rng& rng, int max_segments = 4)
{
    static const char chars[] = "abcdefghijklmnopqrstuvwxyz0123456789_";
    int segments = pick(rng, 1, max_segments);
    std::string addr;
    for (int s = 0; s < segments; ++s) {
        addr += '/';
        int len = pick(rng, 1, 8);
        for (int i = 0; i < len; ++i)
            addr += chars[pick(rng, 0, int(sizeof chars) - 2)];
    }
    return addr;
}

inline std::string printable_string(Rng& rng, int max_len = 16)
{
    int len = pick(rng, 0, max_len);
    std::string s;
    for (int i = 0; i < len; ++i)
        s += char(pick(rng, 0x20, 0x7e));
    return s;
}

inline float random_float(Rng& rng)
{
    switch (pick(rng, 0, 9)) {
    case 0: return 0.0f;
    case 1: return -0.0f;
    case 2: return std::numeric_limits<float>::infinity();
    case 3: return -std::numeric_limits<float>::infinity();
    case 4: return std::numeric_limits<float>::quiet_NaN();
    case 5: return std::numeric_limits<float>::denorm_min();
    default: return std::uniform_real_distribution<float>(-1e6f, 1e6f)(rng);
    }
}

inline mcp2osc::OscArgument random_argument(Rng& rng)
{
    using namespace mcp2osc;
    switch (pick(rng, 0, 10)) {
    case 0: return std::int32_t(std::uniform_int_distribution<std::int32_t>(
                 std::numeric_limits<std::int32_t>::min(),
                 std::numeric_limits<std::int32_t>::max())(rng));
    case 1: return random_float(rng);
    case 2: return printable_string(rng);
    case 3: {
        OscBlob blob(std::size_t(pick(rng, 0, 64)));
        for (auto& b : blob)
            b = std::uint8_t(pick(rng, 0, 255));
        return blob;
    }
    case 4: return OscTrue{};
    case 5: return OscFalse{};
    case 6: return OscNil{};
    case 7: return OscImpulse{};
    case 8: return OscTimetag{std::uint32_t(rng()), std::uint32_t(rng())};
    case 9: return std::int64_t(rng());
    default: return std::uniform_real_distribution<double>(-1e12, 1e12)(rng);
    }
}

inline mcp2osc::OscMessage random_message(Rng& rng)
{
    mcp2osc::OscMessage m;
    m.address = concrete_address(rng);
    int n = pick(rng, 0, 6);
    for (int i = 0; i < n; ++i)
        m.args.push_back(random_argument(rng));
    return m;
}

inline mcp2osc::OscPacket random_packet(Rng& rng, int depth = 0)
{
    if (depth >= 3 || pick(rng, 0, 2) != 0)
        return mcp2osc::OscPacket(random_message(rng));
    mcp2osc::OscBundle b;
    if (pick(rng, 0, 1) == 0)
        b.timetag = mcp2osc::OscTimetag::immediate();
    else
        b.timetag = {std::uint32_t(rng()), std::uint32_t(rng())};
    int n = pick(rng, 0, 4);
    for (int i = 0; i < n; ++i)
        b.elements.push_back(random_packet(rng, depth + 1));
    return mcp2osc::OscPacket(std::move(b));
}

} // namespace gen
