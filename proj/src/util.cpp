#include "mcp2osc/util.hpp"

#include "mcp2osc/error.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <random>

#include <fcntl.h>
#include <unistd.h>

namespace mcp2osc {

std::string format_iso8601_ms(WallClock::time_point tp)
{
    using namespace std::chrono;
    auto ms_total = duration_cast<milliseconds>(tp.time_since_epoch());
    std::time_t secs = ms_total.count() / 1000;
    int ms = static_cast<int>(ms_total.count() % 1000);
    if (ms < 0) { // pre-epoch times
        ms += 1000;
        secs -= 1;
    }
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[80];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
    return buf;
}

std::optional<WallClock::time_point> parse_iso8601_ms(std::string_view text)
{
    int year, mon, day, hour, min, sec, ms = 0;
    char zone = 0;
    int n = std::sscanf(std::string(text).c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c", &year, &mon,
                        &day, &hour, &min, &sec, &ms, &zone);
    if (n < 6)
        return std::nullopt;
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = mon - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = min;
    tm.tm_sec = sec;
    std::time_t secs = timegm(&tm);
    if (secs == -1)
        return std::nullopt;
    return WallClock::time_point(std::chrono::seconds(secs) + std::chrono::milliseconds(ms));
}

namespace {
constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::uint8_t* data, std::size_t len)
{
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= len; i += 3) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
    }
    if (i + 1 == len) {
        std::uint32_t v = data[i] << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == len) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string base64_encode(const std::vector<std::uint8_t>& data)
{
    return base64_encode(data.data(), data.size());
}

std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text)
{
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0)
        return std::nullopt;
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) {
            char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2)
                    return std::nullopt;
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0)
                return std::nullopt; // data after padding
            int d = value_of(c);
            if (d < 0)
                return std::nullopt;
            v = (v << 6) | std::uint32_t(d);
        }
        out.push_back(std::uint8_t(v >> 16));
        if (pad < 2)
            out.push_back(std::uint8_t(v >> 8));
        if (pad < 1)
            out.push_back(std::uint8_t(v));
    }
    return out;
}

std::array<std::uint8_t, 20> sha1(const void* data, std::size_t len)
{
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};

    std::vector<std::uint8_t> msg(static_cast<const std::uint8_t*>(data),
                                  static_cast<const std::uint8_t*>(data) + len);
    std::uint64_t bit_len = std::uint64_t(len) * 8;
    msg.push_back(0x80);
    while (msg.size() % 64 != 56)
        msg.push_back(0);
    for (int i = 7; i >= 0; --i)
        msg.push_back(std::uint8_t(bit_len >> (i * 8)));

    auto rotl = [](std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); };

    for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(msg[chunk + i * 4]) << 24) |
                   (std::uint32_t(msg[chunk + i * 4 + 1]) << 16) |
                   (std::uint32_t(msg[chunk + i * 4 + 2]) << 8) |
                   std::uint32_t(msg[chunk + i * 4 + 3]);
        for (int i = 16; i < 80; ++i)
            w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            std::uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rotl(b, 30);
            b = a;
            a = tmp;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }

    std::array<std::uint8_t, 20> digest;
    for (int i = 0; i < 5; ++i) {
        digest[i * 4] = std::uint8_t(h[i] >> 24);
        digest[i * 4 + 1] = std::uint8_t(h[i] >> 16);
        digest[i * 4 + 2] = std::uint8_t(h[i] >> 8);
        digest[i * 4 + 3] = std::uint8_t(h[i]);
    }
    return digest;
}

HostPort parse_host_port(std::string_view text)
{
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
        raise(ErrorKind::InvalidConfig, "expected host:port, got '" + std::string(text) + "'");
    HostPort hp;
    hp.host = std::string(text.substr(0, colon));
    long port = 0;
    for (char c : text.substr(colon + 1)) {
        if (c < '0' || c > '9')
            raise(ErrorKind::InvalidConfig, "non-numeric port in '" + std::string(text) + "'");
        port = port * 10 + (c - '0');
        if (port > 65535)
            raise(ErrorKind::InvalidConfig, "port out of range in '" + std::string(text) + "'");
    }
    if (port < 1)
        raise(ErrorKind::InvalidConfig, "port out of range in '" + std::string(text) + "'");
    hp.port = std::uint16_t(port);
    return hp;
}

namespace testhook {
std::function<void(const char*, std::size_t)> atomic_write;
} // namespace testhook

void atomic_write_file(const std::filesystem::path& path, std::string_view content)
{
    static std::mt19937_64 rng{std::random_device{}()};
    auto tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(rng());

    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0)
        raise(ErrorKind::IoError, "cannot open " + tmp.string() + ": " + std::strerror(errno));
    if (testhook::atomic_write)
        testhook::atomic_write("opened", 0);

    // Chunked writes so the crash-injection hook can leave a partial temp file.
    std::size_t written = 0;
    const std::size_t chunk = 256;
    while (written < content.size()) {
        std::size_t n = std::min(chunk, content.size() - written);
        ssize_t r = ::write(fd, content.data() + written, n);
        if (r < 0) {
            int err = errno;
            ::close(fd);
            ::unlink(tmp.c_str());
            raise(ErrorKind::IoError, "write failed: " + std::string(std::strerror(err)));
        }
        written += std::size_t(r);
        if (testhook::atomic_write)
            testhook::atomic_write("chunk", written);
    }
    if (::fsync(fd) != 0) {
        int err = errno;
        ::close(fd);
        ::unlink(tmp.c_str());
        raise(ErrorKind::IoError, "fsync failed: " + std::string(std::strerror(err)));
    }
    ::close(fd);
    if (testhook::atomic_write)
        testhook::atomic_write("synced", written);

    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        int err = errno;
        ::unlink(tmp.c_str());
        raise(ErrorKind::IoError,
              "rename to " + path.string() + " failed: " + std::string(std::strerror(err)));
    }
    if (testhook::atomic_write)
        testhook::atomic_write("renamed", written);
}

std::string env_or(const char* name, const std::string& fallback)
{
    const char* v = std::getenv(name);
    return (v && *v) ? std::string(v) : fallback;
}

int env_or_int(const char* name, int fallback)
{
    const char* v = std::getenv(name);
    if (!v || !*v)
        return fallback;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end == v || *end != '\0')
        raise(ErrorKind::InvalidConfig, std::string(name) + " is not an integer: '" + v + "'");
    return int(n);
}

} // namespace mcp2osc
