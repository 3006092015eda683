#include "mofflow/transport.hpp"

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cstring>
#include <istream>
#include <ostream>

#include "mofflow/errors.hpp"

namespace mofflow {

void serve_stream(McpServer& server, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (auto response = server.handle_line(line)) {
            out << *response << '\n';
            out.flush();
        }
    }
}

namespace {

sockaddr_un make_addr(const std::string& path) {
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.size() >= sizeof(addr.sun_path)) {
        throw EngineError("socket path too long: " + path);
    }
    std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
    return addr;
}

bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, 0);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

} // namespace

UnixSocketServer::UnixSocketServer(McpServer& server, std::string socket_path)
    : server_(server), path_(std::move(socket_path)) {}

UnixSocketServer::~UnixSocketServer() {
    stop();
}

void UnixSocketServer::start() {
    listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw EngineError("socket() failed");
    ::unlink(path_.c_str());
    sockaddr_un addr = make_addr(path_);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(listen_fd_, 64) != 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw EngineError("cannot bind socket at " + path_);
    }
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void UnixSocketServer::accept_loop() {
    while (!stopping_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (stopping_) break;
            continue;
        }
        std::lock_guard lock(conn_mutex_);
        conn_fds_.push_back(fd);
        connections_.emplace_back([this, fd] { connection_loop(fd); });
    }
}

void UnixSocketServer::connection_loop(int fd) {
    std::string buffer;
    char chunk[4096];
    while (!stopping_) {
        const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            const std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (line.empty()) continue;
            if (auto response = server_.handle_line(line)) {
                if (!send_all(fd, *response + "\n")) break;
            }
        }
    }
    ::close(fd);
}

void UnixSocketServer::stop() {
    if (stopping_.exchange(true)) return;
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard lock(conn_mutex_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    for (auto& t : connections_) {
        if (t.joinable()) t.join();
    }
    ::unlink(path_.c_str());
}

UnixSocketClient::UnixSocketClient(const std::string& socket_path) {
    fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd_ < 0) throw EngineError("socket() failed");
    sockaddr_un addr = make_addr(socket_path);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw EngineError("cannot connect to " + socket_path);
    }
}

UnixSocketClient::~UnixSocketClient() {
    if (fd_ >= 0) ::close(fd_);
}

std::string UnixSocketClient::round_trip(const std::string& frame) {
    if (!send_all(fd_, frame + "\n")) throw EngineError("socket send failed");
    char chunk[4096];
    for (;;) {
        const std::size_t pos = buffer_.find('\n');
        if (pos != std::string::npos) {
            const std::string line = buffer_.substr(0, pos);
            buffer_.erase(0, pos + 1);
            return line;
        }
        const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n <= 0) throw EngineError("socket closed while awaiting response");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

json UnixSocketClient::request(const json& frame) {
    return json::parse(round_trip(frame.dump()));
}

} // namespace mofflow
