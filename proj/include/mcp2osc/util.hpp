#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcp2osc {

using WallClock = std::chrono::system_clock;
using MonoClock = std::chrono::steady_clock;

// "2026-08-09T12:34:56.789Z" (UTC, millisecond precision).
std::string format_iso8601_ms(WallClock::time_point tp);
std::optional<WallClock::time_point> parse_iso8601_ms(std::string_view text);

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::string base64_encode(const std::vector<std::uint8_t>& data);
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

// SHA-1 digest (needed for the RFC 6455 websocket accept key).
std::array<std::uint8_t, 20> sha1(const void* data, std::size_t len);

struct HostPort {
    std::string host;
    std::uint16_t port = 0;
    std::string text() const { return host + ":" + std::to_string(port); }
};
// Accepts "host:port"; throws Error(InvalidConfig) on malformed input.
HostPort parse_host_port(std::string_view text);

// Write content to a temp file in the same directory, fsync, then rename over
// the target. Either the old or the new file is visible at every instant.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

namespace testhook {
// Crash-injection point for the atomic writer. Phases: "opened", "chunk"
// (after each partial write, with bytes written so far), "synced", "renamed".
// Null in production.
extern std::function<void(const char* phase, std::size_t bytes_written)> atomic_write;
} // namespace testhook

std::string env_or(const char* name, const std::string& fallback);
int env_or_int(const char* name, int fallback);

} // namespace mcp2osc
