// Minimal websocket client for exercising the live feed in tests.
#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace testutil {

class WsClient {
public:
    explicit WsClient(std::uint16_t port, const std::string& path = "/live")
    {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            return;
        std::string request = "GET " + path +
                              " HTTP/1.1\r\n"
                              "Host: 127.0.0.1\r\n"
                              "Upgrade: websocket\r\n"
                              "Connection: Upgrade\r\n"
                              "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\n"
                              "Sec-WebSocket-Version: 13\r\n\r\n";
        ::send(fd_, request.data(), request.size(), 0);
        std::string response;
        char buf[1024];
        while (response.find("\r\n\r\n") == std::string::npos) {
            ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
            if (n <= 0)
                return;
            response.append(buf, std::size_t(n));
        }
        upgraded_ = response.find("101") != std::string::npos &&
                    response.find("Sec-WebSocket-Accept:") != std::string::npos;
        // any bytes past the header belong to the frame stream
        buffer_.assign(response.begin() + long(response.find("\r\n\r\n") + 4), response.end());
    }

    ~WsClient()
    {
        if (fd_ >= 0)
            ::close(fd_);
    }

    bool upgraded() const { return upgraded_; }

    // Next text frame payload, or nullopt on timeout/close.
    std::optional<std::string> read_frame(int timeout_ms = 2000)
    {
        timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        while (true) {
            if (buffer_.size() >= 2) {
                std::size_t len = std::size_t(buffer_[1]) & 0x7f;
                std::size_t header = 2;
                if (len == 126) {
                    if (buffer_.size() >= 4) {
                        len = (std::size_t(std::uint8_t(buffer_[2])) << 8) |
                              std::uint8_t(buffer_[3]);
                        header = 4;
                    } else {
                        len = SIZE_MAX;
                    }
                } else if (len == 127) {
                    if (buffer_.size() >= 10) {
                        len = 0;
                        for (int i = 0; i < 8; ++i)
                            len = (len << 8) | std::uint8_t(buffer_[2 + i]);
                        header = 10;
                    } else {
                        len = SIZE_MAX;
                    }
                }
                if (len != SIZE_MAX && buffer_.size() >= header + len) {
                    std::string payload(buffer_.begin() + long(header),
                                        buffer_.begin() + long(header + len));
                    buffer_.erase(buffer_.begin(), buffer_.begin() + long(header + len));
                    return payload;
                }
            }
            char buf[4096];
            ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
            if (n <= 0)
                return std::nullopt;
            buffer_.insert(buffer_.end(), buf, buf + n);
        }
    }

private:
    int fd_ = -1;
    bool upgraded_ = false;
    std::vector<char> buffer_;
};

} // namespace testutil
