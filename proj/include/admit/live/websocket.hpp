#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace admit::live {

/// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(std::string_view client_key);

enum class Opcode : std::uint8_t
{
  continuation = 0x0,
  text = 0x1,
  binary = 0x2,
  close = 0x8,
  ping = 0x9,
  pong = 0xA,
};

/// One complete frame. Clients must mask, servers must not.
std::string encode_frame(Opcode op, std::string_view payload, std::optional<std::uint32_t> mask_key = std::nullopt);

struct Frame
{
  bool fin = true;
  Opcode op = Opcode::text;
  std::string payload;  // unmasked
};

/// Parses one frame from the front of `buffer`; returns nullopt until enough
/// bytes are present and then erases the consumed bytes. Throws
/// AdmitError(parse_error) on protocol violations.
std::optional<Frame> decode_frame(std::string& buffer, std::size_t max_payload = 1 << 20);

/// Owning TCP socket descriptor.
class Socket
{
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  /// False once the peer is gone.
  bool send_all(std::string_view data);
  /// Blocking read of up to `max` bytes appended to `out`; false on EOF or error.
  bool receive_some(std::string& out, std::size_t max = 16384);
  /// Unblocks readers in other threads; the descriptor stays owned.
  void shutdown();
  void close();

 private:
  int fd_ = -1;
};

/// Listening socket on the loopback interface or any address.
class Listener
{
 public:
  /// Port 0 picks an ephemeral port. Throws AdmitError(io_error).
  Listener(std::uint16_t port, bool loopback_only);
  std::uint16_t port() const { return port_; }
  /// Waits up to timeout_ms; returns an invalid socket on timeout.
  Socket accept(int timeout_ms);
  void close() { socket_.close(); }

 private:
  Socket socket_;
  std::uint16_t port_ = 0;
};

/// A websocket after the opening handshake. Sending is thread-safe; a single
/// thread may receive.
class WebSocket
{
 public:
  enum class Role
  {
    server,
    client,
  };

  WebSocket(Socket socket, Role role, std::string pending = {});
  WebSocket(const WebSocket&) = delete;
  WebSocket& operator=(const WebSocket&) = delete;

  /// Text message, or nullopt once the connection is closed.
  /// Pings are answered; binary messages are rejected with a close frame.
  std::optional<std::string> receive();

  bool send_text(std::string_view message);
  void close(std::uint16_t code = 1000);
  /// Unblocks a thread waiting in receive().
  void shutdown();
  bool open() const { return open_; }

 private:
  bool send_frame(Opcode op, std::string_view payload);

  Socket socket_;
  Role role_;
  std::string buffer_;
  std::mutex send_mutex_;
  std::atomic<bool> open_{true};
  bool close_sent_ = false;  // guarded by send_mutex_
};

/// Reads the HTTP upgrade request from a fresh connection and replies.
/// Non-websocket requests get a 400 and yield null.
std::unique_ptr<WebSocket> accept_websocket(Socket socket, int timeout_ms = 5000);

/// Client side: TCP connect plus opening handshake. Throws AdmitError(io_error).
std::unique_ptr<WebSocket> connect_websocket(const std::string& host, std::uint16_t port, const std::string& path = "/");

}  // namespace admit::live
