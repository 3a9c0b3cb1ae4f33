#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "xaudit/examiner.hpp"
#include "xaudit/model.hpp"

namespace xaudit {

// Serves a decision function over a local TCP socket, one JSON object per
// line: request {"x": [..]} answered with {"score": s, "label": l}. A
// malformed request gets {"error": "..."} and the connection stays open.
// Connections are handled one at a time in arrival order.
class OracleServer {
  public:
    // Binds and listens on 127.0.0.1 immediately; port 0 picks a free port.
    explicit OracleServer(std::shared_ptr<const DecisionFunction> f, int port = 0);
    ~OracleServer();

    OracleServer(const OracleServer&) = delete;
    OracleServer& operator=(const OracleServer&) = delete;

    int port() const { return port_; }

    void serve();  // blocking accept loop; returns once stop() is called
    void start();  // serve() on a background thread
    void stop();   // idempotent; joins the background thread if any

  private:
    void handle_connection(int fd);

    std::shared_ptr<const DecisionFunction> f_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread thread_;
};

// Examiner's side of the wire: a QueryOracle whose decide() is one NDJSON
// round trip. The remote process exposes no explanation channel, so
// explain() reports nothing. Round trips are serialized internally; budget
// accounting is inherited.
class RemoteOracle final : public QueryOracle {
  public:
    RemoteOracle(const std::string& host, int port, std::uint64_t budget);
    ~RemoteOracle() override;

    RemoteOracle(const RemoteOracle&) = delete;
    RemoteOracle& operator=(const RemoteOracle&) = delete;

  protected:
    OracleReply decide_impl(const std::vector<double>& x) override;

  private:
    std::string read_line();

    int fd_ = -1;
    std::string inbuf_;
    std::mutex io_mutex_;
};

}  // namespace xaudit
