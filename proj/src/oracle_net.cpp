#include "xaudit/oracle_net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "json.hpp"
#include "xaudit/error.hpp"

namespace xaudit {

namespace {

using nlohmann::json;

void send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("socket send failed: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
}

// Reads one newline-terminated line, buffering the overshoot. Empty optional
// on orderly peer shutdown.
bool recv_line(int fd, std::string& buffer, std::string& line) {
    for (;;) {
        const std::size_t pos = buffer.find('\n');
        if (pos != std::string::npos) {
            line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            return true;
        }
        char chunk[4096];
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n == 0) return false;
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("socket recv failed: ") + std::strerror(errno));
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

}  // namespace

OracleServer::OracleServer(std::shared_ptr<const DecisionFunction> f, int port) : f_(std::move(f)) {
    if (!f_) throw InvalidArgument("oracle server needs a decision function");
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(std::string("socket creation failed: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw Error("bind to 127.0.0.1:" + std::to_string(port) + " failed: " + err);
    }
    if (::listen(listen_fd_, 8) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw Error("listen failed: " + err);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

OracleServer::~OracleServer() { stop(); }

void OracleServer::handle_connection(int fd) {
    std::string buffer, line;
    while (!stopping_.load(std::memory_order_relaxed)) {
        bool got = false;
        try {
            got = recv_line(fd, buffer, line);
        } catch (const Error&) {
            break;  // peer reset; next connection
        }
        if (!got) break;
        json response;
        try {
            const json request = json::parse(line);
            if (!request.contains("x") || !request["x"].is_array())
                throw InvalidArgument("request needs an \"x\" array");
            std::vector<double> x;
            for (const auto& v : request["x"]) {
                if (!v.is_number()) throw InvalidArgument("\"x\" entries must be numbers");
                x.push_back(v.get<double>());
            }
            if (x.size() != f_->dim())
                throw InvalidArgument("query has dimension " + std::to_string(x.size()) +
                                      ", decision function expects " + std::to_string(f_->dim()));
            const double s = f_->score(x);
            response["score"] = s;
            response["label"] = s >= f_->threshold() ? 1 : 0;
        } catch (const json::exception& e) {
            response = json{{"error", std::string("bad request: ") + e.what()}};
        } catch (const Error& e) {
            response = json{{"error", e.what()}};
        }
        try {
            send_all(fd, response.dump() + "\n");
        } catch (const Error&) {
            break;
        }
    }
    ::close(fd);
}

void OracleServer::serve() {
    while (!stopping_.load(std::memory_order_relaxed)) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;  // listener closed by stop()
        }
        handle_connection(fd);
    }
}

void OracleServer::start() {
    thread_ = std::thread([this] { serve(); });
}

void OracleServer::stop() {
    if (stopping_.exchange(true)) {
        if (thread_.joinable()) thread_.join();
        return;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (thread_.joinable()) thread_.join();
}

RemoteOracle::RemoteOracle(const std::string& host, int port, std::uint64_t budget)
    : QueryOracle(budget) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error(std::string("socket creation failed: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        fd_ = -1;
        throw InvalidArgument("remote oracle host must be an IPv4 address, got " + host);
    }
    if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
        const std::string err = std::strerror(errno);
        ::close(fd_);
        fd_ = -1;
        throw Error("connect to " + host + ":" + std::to_string(port) + " failed: " + err);
    }
}

RemoteOracle::~RemoteOracle() {
    if (fd_ >= 0) ::close(fd_);
}

std::string RemoteOracle::read_line() {
    std::string line;
    if (!recv_line(fd_, inbuf_, line)) throw Error("remote oracle closed the connection");
    return line;
}

OracleReply RemoteOracle::decide_impl(const std::vector<double>& x) {
    std::lock_guard<std::mutex> lock(io_mutex_);
    json request;
    request["x"] = x;
    send_all(fd_, request.dump() + "\n");
    const std::string line = read_line();
    json response;
    try {
        response = json::parse(line);
    } catch (const json::exception& e) {
        throw Error(std::string("remote oracle sent malformed JSON: ") + e.what());
    }
    if (response.contains("error"))
        throw Error("remote oracle error: " + response["error"].get<std::string>());
    if (!response.contains("score") || !response.contains("label"))
        throw Error("remote oracle response needs score and label");
    return OracleReply{response["score"].get<double>(), response["label"].get<int>()};
}

}  // namespace xaudit
