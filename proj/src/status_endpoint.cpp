#include "mcp2osc/status_endpoint.hpp"

#include "mcp2osc/util.hpp"

#include <algorithm>
#include <cstring>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace mcp2osc {

namespace {

constexpr const char* kWsGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

void write_all(int fd, const std::string& data)
{
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0)
            return;
        off += std::size_t(n);
    }
}

void send_http(int fd, int code, const char* status, const std::string& body,
               const char* content_type = "application/json")
{
    std::string head = "HTTP/1.1 " + std::to_string(code) + " " + status + "\r\n";
    head += "Content-Type: " + std::string(content_type) + "\r\n";
    head += "Content-Length: " + std::to_string(body.size()) + "\r\n";
    head += "Connection: close\r\n\r\n";
    write_all(fd, head + body);
}

// FIN text frame, server-to-client (unmasked).
std::string ws_text_frame(const std::string& payload)
{
    std::string frame;
    frame.push_back(char(0x81));
    if (payload.size() < 126) {
        frame.push_back(char(payload.size()));
    } else if (payload.size() <= 0xffff) {
        frame.push_back(126);
        frame.push_back(char((payload.size() >> 8) & 0xff));
        frame.push_back(char(payload.size() & 0xff));
    } else {
        frame.push_back(127);
        for (int i = 7; i >= 0; --i)
            frame.push_back(char((std::uint64_t(payload.size()) >> (i * 8)) & 0xff));
    }
    frame += payload;
    return frame;
}

std::string header_value(const std::string& request, const std::string& name)
{
    std::string lower_req;
    lower_req.reserve(request.size());
    for (char c : request)
        lower_req.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    std::string needle = "\r\n" + name + ":";
    auto pos = lower_req.find(needle);
    if (pos == std::string::npos)
        return {};
    pos += needle.size();
    auto end = request.find("\r\n", pos);
    auto value = request.substr(pos, end - pos);
    auto first = value.find_first_not_of(" \t");
    auto last = value.find_last_not_of(" \t");
    if (first == std::string::npos)
        return {};
    return value.substr(first, last - first + 1);
}

} // namespace

struct StatusEndpoint::Subscriber {
    int fd = -1;
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::string> queue;
    std::atomic<bool> dead{false};
    std::atomic<bool> done{false};
    std::thread writer;

    void run()
    {
        while (!dead) {
            std::string frame;
            {
                std::unique_lock lock(mutex);
                cv.wait(lock, [&] { return dead || !queue.empty(); });
                if (dead)
                    break;
                frame = std::move(queue.front());
                queue.pop_front();
            }

            // drain client frames non-blockingly; close opcode ends the session
            char scratch[512];
            ssize_t r = ::recv(fd, scratch, sizeof scratch, MSG_DONTWAIT);
            if (r == 0 || (r > 0 && (scratch[0] & 0x0f) == 0x8)) {
                dead = true;
                break;
            }

            std::string encoded = ws_text_frame(frame);
            std::size_t off = 0;
            while (off < encoded.size() && !dead) {
                ssize_t n = ::send(fd, encoded.data() + off, encoded.size() - off, MSG_NOSIGNAL);
                if (n <= 0) {
                    dead = true;
                    break;
                }
                off += std::size_t(n);
            }
        }
        done = true;
    }
};

StatusEndpoint::StatusEndpoint(std::uint16_t port, std::function<nlohmann::json()> snapshot)
    : snapshot_(std::move(snapshot))
{
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        bind_error_ = std::strerror(errno);
        return;
    }
    int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 16) != 0) {
        bind_error_ = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        return;
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
}

StatusEndpoint::~StatusEndpoint()
{
    stop_ = true;
    if (listen_fd_ >= 0)
        ::shutdown(listen_fd_, SHUT_RDWR);
    if (acceptor_.joinable())
        acceptor_.join();
    if (listen_fd_ >= 0)
        ::close(listen_fd_);

    std::vector<std::shared_ptr<Subscriber>> subs;
    {
        std::lock_guard lock(subscribers_mutex_);
        subs.swap(subscribers_);
    }
    for (auto& s : subs) {
        s->dead = true;
        s->cv.notify_all();
        ::shutdown(s->fd, SHUT_RDWR);
        if (s->writer.joinable())
            s->writer.join();
        ::close(s->fd);
    }
}

void StatusEndpoint::accept_loop()
{
    while (!stop_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, 200);
        if (stop_)
            break;
        if (rc <= 0)
            continue;
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0)
            continue;
        handle_connection(fd);
    }
}

void StatusEndpoint::handle_connection(int fd)
{
    timeval tv{2, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);

    std::string request;
    char buf[2048];
    while (request.find("\r\n\r\n") == std::string::npos && request.size() < 16384) {
        ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n <= 0)
            break;
        request.append(buf, std::size_t(n));
    }
    if (request.find("\r\n\r\n") == std::string::npos) {
        ::close(fd);
        return;
    }

    auto line_end = request.find("\r\n");
    std::string request_line = request.substr(0, line_end);
    bool get = request_line.rfind("GET ", 0) == 0;
    auto path_end = request_line.find(' ', 4);
    std::string path = get && path_end != std::string::npos
                           ? request_line.substr(4, path_end - 4)
                           : "";

    if (!get) {
        send_http(fd, 405, "Method Not Allowed", "{\"error\":\"GET only\"}");
        ::close(fd);
        return;
    }

    if (path == "/status") {
        send_http(fd, 200, "OK", snapshot_().dump(2) + "\n");
        ::close(fd);
        return;
    }

    if (path == "/live") {
        std::string key = header_value(request, "sec-websocket-key");
        std::string upgrade = header_value(request, "upgrade");
        std::transform(upgrade.begin(), upgrade.end(), upgrade.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        if (key.empty() || upgrade != "websocket") {
            send_http(fd, 400, "Bad Request",
                      "{\"error\":\"GET /live requires a websocket upgrade\"}");
            ::close(fd);
            return;
        }
        std::string accept_src = key + kWsGuid;
        auto digest = sha1(accept_src.data(), accept_src.size());
        std::string accept = base64_encode(digest.data(), digest.size());
        std::string response = "HTTP/1.1 101 Switching Protocols\r\n"
                               "Upgrade: websocket\r\n"
                               "Connection: Upgrade\r\n"
                               "Sec-WebSocket-Accept: " +
                               accept + "\r\n\r\n";
        write_all(fd, response);

        auto sub = std::make_shared<Subscriber>();
        sub->fd = fd;
        sub->writer = std::thread([sub] { sub->run(); });
        std::lock_guard lock(subscribers_mutex_);
        subscribers_.push_back(std::move(sub));
        return;
    }

    send_http(fd, 404, "Not Found", "{\"error\":\"unknown path; use /status or /live\"}");
    ::close(fd);
}

void StatusEndpoint::publish(const std::string& frame)
{
    std::lock_guard lock(subscribers_mutex_);
    for (auto& s : subscribers_) {
        if (s->dead)
            continue;
        std::unique_lock sl(s->mutex);
        if (s->queue.size() >= kBacklogLimit) {
            sl.unlock();
            s->dead = true; // slow consumer: cut it loose
            ::shutdown(s->fd, SHUT_RDWR);
            s->cv.notify_all();
            continue;
        }
        s->queue.push_back(frame);
        sl.unlock();
        s->cv.notify_all();
    }
    reap_locked();
}

void StatusEndpoint::reap_locked()
{
    for (auto it = subscribers_.begin(); it != subscribers_.end();) {
        auto& s = *it;
        if (s->done) {
            if (s->writer.joinable())
                s->writer.join();
            ::close(s->fd);
            it = subscribers_.erase(it);
        } else {
            ++it;
        }
    }
}

std::size_t StatusEndpoint::subscriber_count() const
{
    std::lock_guard lock(subscribers_mutex_);
    std::size_t n = 0;
    for (const auto& s : subscribers_)
        if (!s->dead && !s->done)
            ++n;
    return n;
}

} // namespace mcp2osc
