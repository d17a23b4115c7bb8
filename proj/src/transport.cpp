#include "mcp2osc/transport.hpp"

#include "mcp2osc/codec.hpp"
#include "mcp2osc/error.hpp"

#include <cstring>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace mcp2osc {

namespace {

std::uint64_t mono_now_ns()
{
    return std::uint64_t(
        std::chrono::duration_cast<std::chrono::nanoseconds>(MonoClock::now().time_since_epoch())
            .count());
}

std::string hex_preview(const std::vector<std::uint8_t>& bytes, std::size_t max = 16)
{
    static const char* digits = "0123456789abcdef";
    std::string out = "0x";
    for (std::size_t i = 0; i < bytes.size() && i < max; ++i) {
        out += digits[bytes[i] >> 4];
        out += digits[bytes[i] & 0xf];
    }
    if (bytes.size() > max)
        out += "...";
    return out;
}

} // namespace

EndpointConfig EndpointConfig::from_env()
{
    EndpointConfig c;
    c.send_host = env_or("MCP2OSC_SEND_HOST", c.send_host);
    c.send_port = std::uint16_t(env_or_int("MCP2OSC_SEND_PORT", c.send_port));
    c.receive_port = std::uint16_t(env_or_int("MCP2OSC_RECEIVE_PORT", c.receive_port));
    c.max_datagram = std::size_t(env_or_int("MCP2OSC_MAX_DATAGRAM", int(c.max_datagram)));
    c.receive_bind_attempts = env_or_int("MCP2OSC_BIND_ATTEMPTS", c.receive_bind_attempts);
    c.validate();
    return c;
}

void EndpointConfig::validate() const
{
    if (send_host.empty())
        raise(ErrorKind::InvalidConfig, "send_host is empty");
    if (send_port == 0)
        raise(ErrorKind::InvalidConfig, "send_port must be in 1..65535");
    if (receive_port == 0)
        raise(ErrorKind::InvalidConfig, "receive_port must be in 1..65535");
    if (receive_bind_attempts < 1)
        raise(ErrorKind::InvalidConfig, "receive_bind_attempts must be >= 1");
    if (max_datagram < 32 || max_datagram > 65507)
        raise(ErrorKind::InvalidConfig, "max_datagram must be in 32..65507");
}

Transport::Transport(const EndpointConfig& config, MessageLog* log) : config_(config), log_(log)
{
    config_.validate();

    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0)
        raise(ErrorKind::NetworkError, std::string("socket: ") + std::strerror(errno));

    // Graceful port acquisition: walk forward from receive_port.
    bool bound = false;
    for (int k = 0; k < config_.receive_bind_attempts; ++k) {
        long candidate = long(config_.receive_port) + k;
        if (candidate > 65535)
            break;
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        addr.sin_port = htons(std::uint16_t(candidate));
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
            bound_port_ = std::uint16_t(candidate);
            fallback_ = k > 0;
            bound = true;
            break;
        }
        if (errno != EADDRINUSE)
            break;
    }
    if (!bound) {
        ::close(fd_);
        fd_ = -1;
        raise(ErrorKind::AllPortsBusy,
              "ports " + std::to_string(config_.receive_port) + ".." +
                  std::to_string(config_.receive_port + config_.receive_bind_attempts - 1) +
                  " are all busy");
    }

    timeval tv{0, 100 * 1000}; // wake regularly so shutdown is prompt
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);

    receiver_ = std::thread([this] { receive_loop(); });
}

Transport::~Transport()
{
    stop_ = true;
    if (receiver_.joinable())
        receiver_.join();
    if (fd_ >= 0)
        ::close(fd_);
}

void Transport::receive_loop()
{
    std::vector<std::uint8_t> buf(65536);
    while (!stop_) {
        sockaddr_in src{};
        socklen_t srclen = sizeof src;
        ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&src),
                               &srclen);
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)
                continue;
            break;
        }

        ReceivedDatagram dgram;
        dgram.bytes.assign(buf.begin(), buf.begin() + n);
        dgram.wall_time = WallClock::now();
        dgram.mono_ns = mono_now_ns();
        char host[INET_ADDRSTRLEN] = {0};
        ::inet_ntop(AF_INET, &src.sin_addr, host, sizeof host);
        dgram.source = std::string(host) + ":" + std::to_string(ntohs(src.sin_port));
        datagrams_received_.fetch_add(1);

        std::optional<OscPacket> packet;
        std::string decode_error;
        try {
            packet = decode_packet(dgram.bytes);
        } catch (const Error& e) {
            decode_error = std::string(e.kind_name()) + ": " + e.message();
        }

        // log before anything can observe the datagram
        if (log_) {
            if (packet) {
                for (auto& entry : entries_for_packet(*packet, Direction::In, dgram.source,
                                                      dgram.wall_time, dgram.mono_ns))
                    log_->append(std::move(entry));
            } else {
                LogEntry entry;
                entry.direction = Direction::In;
                entry.wall_time = dgram.wall_time;
                entry.mono_ns = dgram.mono_ns;
                entry.endpoint = dgram.source;
                entry.decode_error = decode_error + "; " + std::to_string(dgram.bytes.size()) +
                                     " byte(s): " + hex_preview(dgram.bytes);
                log_->append(std::move(entry));
            }
        }

        {
            std::lock_guard lock(queue_mutex_);
            queue_.push_back(dgram);
            if (queue_.size() > kQueueCap)
                queue_.pop_front();
        }

        std::vector<Listener> listeners;
        {
            std::lock_guard lock(listener_mutex_);
            listeners.reserve(listeners_.size());
            for (const auto& [id, fn] : listeners_)
                listeners.push_back(fn);
        }
        for (const auto& fn : listeners)
            fn(dgram, packet ? &*packet : nullptr, decode_error);
    }
}

SendReport Transport::send(const OscPacket& packet, const std::optional<std::string>& dest)
{
    auto bytes = encode_packet(packet);
    if (bytes.size() > config_.max_datagram)
        raise(ErrorKind::DatagramTooLarge,
              "encoded packet is " + std::to_string(bytes.size()) + " bytes, limit " +
                  std::to_string(config_.max_datagram));

    HostPort target = dest ? parse_host_port(*dest)
                           : HostPort{config_.send_host, config_.send_port};

    std::uint32_t ip_be = 0;
    {
        std::lock_guard lock(resolve_mutex_);
        auto it = resolve_cache_.find(target.host);
        if (it != resolve_cache_.end()) {
            ip_be = it->second.first;
        } else {
            in_addr literal{};
            if (::inet_pton(AF_INET, target.host.c_str(), &literal) == 1) {
                ip_be = literal.s_addr;
            } else {
                addrinfo hints{};
                hints.ai_family = AF_INET;
                hints.ai_socktype = SOCK_DGRAM;
                addrinfo* res = nullptr;
                int rc = ::getaddrinfo(target.host.c_str(), nullptr, &hints, &res);
                if (rc != 0 || !res)
                    raise(ErrorKind::NetworkError,
                          "cannot resolve '" + target.host + "': " + gai_strerror(rc));
                ip_be = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr.s_addr;
                ::freeaddrinfo(res);
            }
            resolve_cache_[target.host] = {ip_be, 0};
        }
    }

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = ip_be;
    addr.sin_port = htons(target.port);

    auto wall = WallClock::now();
    auto mono = mono_now_ns();
    ssize_t n = ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<sockaddr*>(&addr),
                         sizeof addr);
    if (n < 0)
        raise(ErrorKind::NetworkError,
              "sendto " + target.text() + ": " + std::strerror(errno));
    datagrams_sent_.fetch_add(1);

    SendReport report;
    report.dest = target.text();
    report.bytes = bytes.size();
    if (log_)
        for (auto& entry : entries_for_packet(packet, Direction::Out, report.dest, wall, mono))
            report.log_seqs.push_back(log_->append(std::move(entry)));
    return report;
}

std::vector<ReceivedDatagram> Transport::poll_received()
{
    std::lock_guard lock(queue_mutex_);
    std::vector<ReceivedDatagram> out(queue_.begin(), queue_.end());
    queue_.clear();
    return out;
}

std::uint64_t Transport::add_listener(Listener listener)
{
    std::lock_guard lock(listener_mutex_);
    auto id = next_listener_id_++;
    listeners_[id] = std::move(listener);
    return id;
}

void Transport::remove_listener(std::uint64_t id)
{
    std::lock_guard lock(listener_mutex_);
    listeners_.erase(id);
}

} // namespace mcp2osc
