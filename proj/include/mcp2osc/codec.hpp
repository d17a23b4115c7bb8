#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "mcp2osc/osc_types.hpp"

namespace mcp2osc {

inline constexpr std::size_t kMaxBlobBytes = 64 * 1024;
inline constexpr int kMaxBundleDepth = 8;
inline constexpr std::uint32_t kNtpUnixOffsetSeconds = 2208988800u;

// Binary wire format: NUL-padded strings to 4-byte boundaries, big-endian
// numerics, ','-prefixed type-tag string, length-prefixed padded blobs.
std::vector<std::uint8_t> encode_message(const OscMessage& msg);
std::vector<std::uint8_t> encode_bundle(const OscBundle& bundle);
std::vector<std::uint8_t> encode_packet(const OscPacket& packet);

// Decoders consume every input byte or throw. Messages without a type-tag
// string are rejected.
OscMessage decode_message(std::span<const std::uint8_t> bytes);
OscBundle decode_bundle(std::span<const std::uint8_t> bytes);
OscPacket decode_packet(std::span<const std::uint8_t> bytes);

OscTimetag timetag_from_walltime(std::chrono::system_clock::time_point t);
std::chrono::system_clock::time_point timetag_to_walltime(const OscTimetag& tt);

} // namespace mcp2osc
