#include "admit/live/websocket.hpp"

#include "admit/error.hpp"

#include <openssl/evp.h>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <random>

namespace admit::live {

namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string base64(const unsigned char* data, std::size_t n)
{
  std::string out(4 * ((n + 2) / 3), '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data, static_cast<int>(n));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

/// Header lookup in a raw HTTP head, case-insensitive on the name.
std::optional<std::string> header_value(const std::string& head, const std::string& name)
{
  const std::string wanted = lower(name);
  std::size_t pos = head.find("\r\n");
  while (pos != std::string::npos && pos + 2 < head.size())
  {
    const std::size_t start = pos + 2;
    const std::size_t end = head.find("\r\n", start);
    const std::string line = head.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const std::size_t colon = line.find(':');
    if (colon != std::string::npos && lower(trim(line.substr(0, colon))) == wanted)
      return trim(std::string_view(line).substr(colon + 1));
    pos = end;
  }
  return std::nullopt;
}

std::uint32_t random_u32()
{
  static thread_local std::mt19937 rng{std::random_device{}()};
  return rng();
}

/// Reads until the blank line that ends an HTTP head; extra bytes stay in `rest`.
bool read_http_head(Socket& socket, std::string& head, std::string& rest, int timeout_ms)
{
  std::string buffer;
  while (true)
  {
    const std::size_t end = buffer.find("\r\n\r\n");
    if (end != std::string::npos)
    {
      head = buffer.substr(0, end + 2);
      rest = buffer.substr(end + 4);
      return true;
    }
    if (buffer.size() > 16384) return false;
    pollfd pfd{socket.fd(), POLLIN, 0};
    if (::poll(&pfd, 1, timeout_ms) <= 0) return false;
    if (!socket.receive_some(buffer)) return false;
  }
}

}  // namespace

std::string websocket_accept_key(std::string_view client_key)
{
  std::string material(client_key);
  material += kGuid;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw AdmitError(ErrorKind::io_error, "sha1 digest failed");
  return base64(digest, len);
}

std::string encode_frame(Opcode op, std::string_view payload, std::optional<std::uint32_t> mask_key)
{
  std::string out;
  out.reserve(payload.size() + 14);
  out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
  const std::uint8_t mask_bit = mask_key ? 0x80 : 0x00;
  const std::uint64_t n = payload.size();
  if (n < 126)
  {
    out.push_back(static_cast<char>(mask_bit | n));
  }
  else if (n <= 0xFFFF)
  {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
  }
  else
  {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xFF));
  }
  if (!mask_key)
  {
    out.append(payload);
    return out;
  }
  const std::uint8_t key[4] = {static_cast<std::uint8_t>(*mask_key >> 24), static_cast<std::uint8_t>(*mask_key >> 16),
                               static_cast<std::uint8_t>(*mask_key >> 8), static_cast<std::uint8_t>(*mask_key)};
  out.append(reinterpret_cast<const char*>(key), 4);
  for (std::size_t i = 0; i < payload.size(); ++i)
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ key[i % 4]));
  return out;
}

std::optional<Frame> decode_frame(std::string& buffer, std::size_t max_payload)
{
  if (buffer.size() < 2) return std::nullopt;
  const auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(buffer[i]); };
  if (byte(0) & 0x70) throw AdmitError(ErrorKind::parse_error, "websocket: reserved bits set");
  Frame frame;
  frame.fin = (byte(0) & 0x80) != 0;
  const std::uint8_t op = byte(0) & 0x0F;
  switch (op)
  {
    case 0x0:
    case 0x1:
    case 0x2:
    case 0x8:
    case 0x9:
    case 0xA:
      frame.op = static_cast<Opcode>(op);
      break;
    default:
      throw AdmitError(ErrorKind::parse_error, "websocket: unknown opcode " + std::to_string(op));
  }
  const bool masked = (byte(1) & 0x80) != 0;
  std::uint64_t n = byte(1) & 0x7F;
  std::size_t pos = 2;
  if (n == 126)
  {
    if (buffer.size() < 4) return std::nullopt;
    n = (std::uint64_t{byte(2)} << 8) | byte(3);
    pos = 4;
  }
  else if (n == 127)
  {
    if (buffer.size() < 10) return std::nullopt;
    n = 0;
    for (std::size_t i = 2; i < 10; ++i) n = (n << 8) | byte(i);
    pos = 10;
  }
  if (n > max_payload) throw AdmitError(ErrorKind::parse_error, "websocket: frame exceeds size limit");
  if ((op & 0x8) && (n > 125 || !frame.fin))
    throw AdmitError(ErrorKind::parse_error, "websocket: malformed control frame");
  std::uint8_t key[4] = {0, 0, 0, 0};
  if (masked)
  {
    if (buffer.size() < pos + 4) return std::nullopt;
    for (int i = 0; i < 4; ++i) key[i] = byte(pos + static_cast<std::size_t>(i));
    pos += 4;
  }
  if (buffer.size() < pos + n) return std::nullopt;
  frame.payload = buffer.substr(pos, n);
  if (masked)
    for (std::size_t i = 0; i < frame.payload.size(); ++i)
      frame.payload[i] = static_cast<char>(static_cast<std::uint8_t>(frame.payload[i]) ^ key[i % 4]);
  buffer.erase(0, pos + n);
  return frame;
}

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Socket& Socket::operator=(Socket&& other) noexcept
{
  if (this != &other)
  {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

Socket::~Socket() { close(); }

bool Socket::send_all(std::string_view data)
{
  while (!data.empty())
  {
    const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

bool Socket::receive_some(std::string& out, std::size_t max)
{
  char buf[16384];
  while (true)
  {
    const ssize_t n = ::recv(fd_, buf, std::min(max, sizeof buf), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    out.append(buf, static_cast<std::size_t>(n));
    return true;
  }
}

void Socket::shutdown()
{
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close()
{
  if (fd_ >= 0)
  {
    ::close(fd_);
    fd_ = -1;
  }
}

Listener::Listener(std::uint16_t port, bool loopback_only)
{
  socket_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!socket_.valid()) throw AdmitError(ErrorKind::io_error, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(loopback_only ? INADDR_LOOPBACK : INADDR_ANY);
  if (::bind(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    throw AdmitError(ErrorKind::io_error, "bind port " + std::to_string(port) + ": " + std::strerror(errno));
  if (::listen(socket_.fd(), 16) != 0) throw AdmitError(ErrorKind::io_error, std::string("listen: ") + std::strerror(errno));
  socklen_t len = sizeof addr;
  ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Socket Listener::accept(int timeout_ms)
{
  if (!socket_.valid()) return Socket();
  pollfd pfd{socket_.fd(), POLLIN, 0};
  if (::poll(&pfd, 1, timeout_ms) <= 0 || !(pfd.revents & POLLIN)) return Socket();
  Socket s(::accept4(socket_.fd(), nullptr, nullptr, SOCK_CLOEXEC));
  if (s.valid())
  {
    const int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  return s;
}

WebSocket::WebSocket(Socket socket, Role role, std::string pending)
    : socket_(std::move(socket)), role_(role), buffer_(std::move(pending))
{
}

bool WebSocket::send_frame(Opcode op, std::string_view payload)
{
  std::lock_guard lock(send_mutex_);
  if (close_sent_) return false;
  if (op == Opcode::close) close_sent_ = true;
  const std::optional<std::uint32_t> mask = role_ == Role::client ? std::optional(random_u32()) : std::nullopt;
  const bool ok = socket_.send_all(encode_frame(op, payload, mask));
  if (!ok) open_ = false;
  return ok;
}

bool WebSocket::send_text(std::string_view message)
{
  if (!open_) return false;
  return send_frame(Opcode::text, message);
}

void WebSocket::close(std::uint16_t code)
{
  const char payload[2] = {static_cast<char>(code >> 8), static_cast<char>(code & 0xFF)};
  send_frame(Opcode::close, std::string_view(payload, 2));
  open_ = false;
  socket_.shutdown();
}

void WebSocket::shutdown()
{
  open_ = false;
  socket_.shutdown();
}

std::optional<std::string> WebSocket::receive()
{
  std::string message;
  bool in_message = false;
  while (true)
  {
    std::optional<Frame> frame;
    try
    {
      frame = decode_frame(buffer_);
    }
    catch (const AdmitError&)
    {
      close(1002);
      return std::nullopt;
    }
    if (!frame)
    {
      if (!socket_.receive_some(buffer_))
      {
        open_ = false;
        return std::nullopt;
      }
      continue;
    }
    switch (frame->op)
    {
      case Opcode::ping:
        send_frame(Opcode::pong, frame->payload);
        break;
      case Opcode::pong:
        break;
      case Opcode::close:
        send_frame(Opcode::close, frame->payload.substr(0, 2));
        open_ = false;
        socket_.shutdown();
        return std::nullopt;
      case Opcode::binary:
        close(1003);
        return std::nullopt;
      case Opcode::text:
        if (in_message)
        {
          close(1002);
          return std::nullopt;
        }
        message = std::move(frame->payload);
        in_message = true;
        if (frame->fin) return message;
        break;
      case Opcode::continuation:
        if (!in_message)
        {
          close(1002);
          return std::nullopt;
        }
        message += frame->payload;
        if (message.size() > (1u << 20))
        {
          close(1009);
          return std::nullopt;
        }
        if (frame->fin) return message;
        break;
    }
  }
}

std::unique_ptr<WebSocket> accept_websocket(Socket socket, int timeout_ms)
{
  std::string head, rest;
  if (!read_http_head(socket, head, rest, timeout_ms)) return nullptr;
  const auto upgrade = header_value(head, "Upgrade");
  const auto key = header_value(head, "Sec-WebSocket-Key");
  if (head.rfind("GET ", 0) != 0 || !upgrade || lower(*upgrade) != "websocket" || !key)
  {
    socket.send_all(
        "HTTP/1.1 400 Bad Request\r\nContent-Type: text/plain\r\nConnection: close\r\nContent-Length: 25\r\n\r\n"
        "websocket upgrade needed\n");
    return nullptr;
  }
  const std::string response =
      "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Accept: " +
      websocket_accept_key(*key) + "\r\n\r\n";
  if (!socket.send_all(response)) return nullptr;
  return std::make_unique<WebSocket>(std::move(socket), WebSocket::Role::server, std::move(rest));
}

std::unique_ptr<WebSocket> connect_websocket(const std::string& host, std::uint16_t port, const std::string& path)
{
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0)
    throw AdmitError(ErrorKind::io_error, "resolve " + host + ": " + ::gai_strerror(rc));
  Socket socket;
  for (addrinfo* ai = found; ai; ai = ai->ai_next)
  {
    Socket candidate(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (candidate.valid() && ::connect(candidate.fd(), ai->ai_addr, ai->ai_addrlen) == 0)
    {
      socket = std::move(candidate);
      break;
    }
  }
  ::freeaddrinfo(found);
  if (!socket.valid()) throw AdmitError(ErrorKind::io_error, "connect " + host + ":" + service + " failed");

  unsigned char nonce[16];
  for (int i = 0; i < 16; i += 4)
  {
    const std::uint32_t r = random_u32();
    std::memcpy(nonce + i, &r, 4);
  }
  const std::string key = base64(nonce, sizeof nonce);
  const std::string request = "GET " + path + " HTTP/1.1\r\nHost: " + host + ":" + service +
                              "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                              "\r\nSec-WebSocket-Version: 13\r\n\r\n";
  if (!socket.send_all(request)) throw AdmitError(ErrorKind::io_error, "handshake send failed");
  std::string head, rest;
  if (!read_http_head(socket, head, rest, 5000)) throw AdmitError(ErrorKind::io_error, "handshake: no response");
  if (head.rfind("HTTP/1.1 101", 0) != 0)
    throw AdmitError(ErrorKind::io_error, "handshake refused: " + head.substr(0, head.find("\r\n")));
  const auto accept = header_value(head, "Sec-WebSocket-Accept");
  if (!accept || *accept != websocket_accept_key(key))
    throw AdmitError(ErrorKind::io_error, "handshake: bad Sec-WebSocket-Accept");
  return std::make_unique<WebSocket>(std::move(socket), WebSocket::Role::client, std::move(rest));
}

}  // namespace admit::live
