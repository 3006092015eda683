#pragma once

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "mofflow/mcp.hpp"

namespace mofflow {

// Blocking serve loop over newline-delimited frames; returns at EOF.
void serve_stream(McpServer& server, std::istream& in, std::ostream& out);

// Shared local endpoint for multiple executor agents: a Unix domain
// socket carrying newline-delimited JSON-RPC frames, one thread per
// connection.
class UnixSocketServer {
  public:
    UnixSocketServer(McpServer& server, std::string socket_path);
    ~UnixSocketServer();

    void start(); // throws EngineError on bind failure
    void stop();
    const std::string& path() const { return path_; }

  private:
    void accept_loop();
    void connection_loop(int fd);

    McpServer& server_;
    std::string path_;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex conn_mutex_;
    std::vector<std::thread> connections_;
    std::vector<int> conn_fds_;
};

class UnixSocketClient {
  public:
    explicit UnixSocketClient(const std::string& socket_path);
    ~UnixSocketClient();

    // Send one frame, read one response line.
    std::string round_trip(const std::string& frame);
    json request(const json& frame);

  private:
    int fd_ = -1;
    std::string buffer_;
};

} // namespace mofflow
