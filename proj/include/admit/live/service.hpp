#pragma once

#include "admit/live/websocket.hpp"
#include "admit/live/wire.hpp"
#include "admit/scenario_config.hpp"
#include "admit/sim.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace admit::live {

struct ServerOptions
{
  std::uint16_t port = 8765;  // 0 picks a free port
  bool loopback_only = true;
  std::optional<std::filesystem::path> trace_out;  // full-rate trace written on stop
  std::size_t outbox_limit = 1024;                 // per client; oldest messages dropped first
};

/// One interactive session behind a websocket endpoint. The simulation thread
/// owns all model state; sockets talk to it through a command queue and
/// per-client outboxes.
class LiveServer
{
 public:
  /// Certifies the config and binds the port. Throws AdmitError.
  LiveServer(ScenarioConfig config, ServerOptions options);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  std::uint16_t port() const { return listener_.port(); }

  void start();
  /// Idempotent. Joins all threads and writes the trace if requested.
  void stop();

  std::size_t client_count() const;
  std::uint64_t steps_taken() const { return steps_taken_; }

 private:
  struct Client
  {
    std::uint64_t id = 0;
    std::unique_ptr<WebSocket> socket;
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<std::string> outbox;
    bool closing = false;
    std::atomic<bool> finished{false};
    std::thread reader;
    std::thread writer;
  };

  struct PendingCommand
  {
    std::uint64_t client = 0;
    WireCommand command;
  };

  void accept_loop();
  void simulation_loop();
  void reader_loop(Client& client);
  void writer_loop(Client& client);

  void broadcast(const std::string& message);
  void send_to(std::uint64_t client_id, const std::string& message);
  void push(Client& client, const std::string& message);
  void reap_finished_clients();
  void shutdown_client(Client& client);
  std::string status_message(bool paused, bool halted) const;

  ServerOptions options_;
  RealtimeSession session_;  // simulation thread only once started
  Listener listener_;

  std::mutex hello_mutex_;
  std::string hello_;

  mutable std::mutex clients_mutex_;
  std::vector<std::unique_ptr<Client>> clients_;
  std::uint64_t next_client_id_ = 1;

  std::mutex command_mutex_;
  std::condition_variable command_ready_;
  std::deque<PendingCommand> commands_;

  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> steps_taken_{0};
  bool started_ = false;
  bool stopped_ = false;
  std::thread accept_thread_;
  std::thread sim_thread_;
};

}  // namespace admit::live
