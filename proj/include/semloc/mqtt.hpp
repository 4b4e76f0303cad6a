#ifndef SEMLOC_MQTT_HPP_
#define SEMLOC_MQTT_HPP_

// MQTT 3.1.1 client binding for the Bus interface. QoS 0 only, no TLS, no auth.

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "semloc/bus.hpp"
#include "semloc/types.hpp"

namespace semloc::mqtt
{
enum PacketType : std::uint8_t
{
  kConnect = 1,
  kConnAck = 2,
  kPublish = 3,
  kSubscribe = 8,
  kSubAck = 9,
  kPingReq = 12,
  kPingResp = 13,
  kDisconnect = 14,
};

using Bytes = std::vector<std::uint8_t>;

inline void put_remaining_length(Bytes& out, std::size_t n)
{
  if (n > 268435455)
    throw ValidationError("mqtt: packet too large");
  do
  {
    std::uint8_t byte = n % 128;
    n /= 128;
    if (n > 0)
      byte |= 0x80;
    out.push_back(byte);
  } while (n > 0);
}

/// Decodes the variable-length size field; nothing if more bytes are needed.
inline std::optional<std::pair<std::size_t, std::size_t>> get_remaining_length(std::span<const std::uint8_t> in)
{
  std::size_t value = 0;
  std::size_t multiplier = 1;
  for (std::size_t i = 0; i < in.size(); ++i)
  {
    if (i == 4)
      throw ValidationError("mqtt: malformed remaining length");
    value += (in[i] & 0x7F) * multiplier;
    if ((in[i] & 0x80) == 0)
      return std::pair{value, i + 1};
    multiplier *= 128;
  }
  return std::nullopt;
}

inline void put_u16(Bytes& out, std::uint16_t v)
{
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

inline void put_string(Bytes& out, std::string_view s)
{
  if (s.size() > 0xFFFF)
    throw ValidationError("mqtt: string too long");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

inline Bytes frame(std::uint8_t header, const Bytes& body)
{
  Bytes out{header};
  put_remaining_length(out, body.size());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

inline Bytes encode_connect(std::string_view client_id, std::uint16_t keep_alive_s)
{
  Bytes body;
  put_string(body, "MQTT");
  body.push_back(4);     // protocol level 3.1.1
  body.push_back(0x02);  // clean session
  put_u16(body, keep_alive_s);
  put_string(body, client_id);
  return frame(kConnect << 4, body);
}

inline Bytes encode_subscribe(std::uint16_t packet_id, std::string_view filter)
{
  Bytes body;
  put_u16(body, packet_id);
  put_string(body, filter);
  body.push_back(0);  // requested QoS
  return frame((kSubscribe << 4) | 0x02, body);
}

inline Bytes encode_publish(std::string_view topic, std::string_view payload)
{
  Bytes body;
  put_string(body, topic);
  body.insert(body.end(), payload.begin(), payload.end());
  return frame(kPublish << 4, body);
}

inline Bytes encode_pingreq() { return {kPingReq << 4, 0}; }
inline Bytes encode_disconnect() { return {kDisconnect << 4, 0}; }

struct Packet
{
  std::uint8_t type = 0;
  std::uint8_t flags = 0;
  Bytes body;
};

/// Splits complete packets off the front of buf.
inline std::vector<Packet> take_packets(Bytes& buf)
{
  std::vector<Packet> out;
  std::size_t pos = 0;
  while (buf.size() - pos >= 2)
  {
    const auto len = get_remaining_length(std::span(buf).subspan(pos + 1));
    if (!len)
      break;
    const auto [size, width] = *len;
    const std::size_t total = 1 + width + size;
    if (buf.size() - pos < total)
      break;
    Packet p;
    p.type = buf[pos] >> 4;
    p.flags = buf[pos] & 0x0F;
    p.body.assign(buf.begin() + static_cast<std::ptrdiff_t>(pos + 1 + width),
                  buf.begin() + static_cast<std::ptrdiff_t>(pos + total));
    out.push_back(std::move(p));
    pos += total;
  }
  buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(pos));
  return out;
}

/// Topic and payload of a PUBLISH body; skips the packet id for QoS > 0.
inline std::pair<std::string, std::string> decode_publish(const Packet& p)
{
  if (p.body.size() < 2)
    throw ValidationError("mqtt: short PUBLISH");
  const std::size_t tlen = (p.body[0] << 8) | p.body[1];
  std::size_t pos = 2 + tlen;
  if (((p.flags >> 1) & 0x03) != 0)
    pos += 2;
  if (pos > p.body.size())
    throw ValidationError("mqtt: truncated PUBLISH");
  return {std::string(p.body.begin() + 2, p.body.begin() + static_cast<std::ptrdiff_t>(2 + tlen)),
          std::string(p.body.begin() + static_cast<std::ptrdiff_t>(pos), p.body.end())};
}

struct Endpoint
{
  std::string host = "127.0.0.1";
  std::uint16_t port = 1883;
};

/// Accepts mqtt://host[:port], tcp://host[:port] or host[:port].
inline Endpoint parse_url(std::string_view url)
{
  Endpoint ep;
  if (auto p = url.find("://"); p != std::string_view::npos)
  {
    const auto scheme = url.substr(0, p);
    if (scheme != "mqtt" && scheme != "tcp")
      throw ValidationError("unsupported bus scheme '" + std::string(scheme) + "'");
    url.remove_prefix(p + 3);
  }
  if (auto slash = url.find('/'); slash != std::string_view::npos)
    url = url.substr(0, slash);
  if (auto colon = url.rfind(':'); colon != std::string_view::npos)
  {
    const auto port = std::stoul(std::string(url.substr(colon + 1)));
    if (port == 0 || port > 65535)
      throw ValidationError("bus port out of range");
    ep.port = static_cast<std::uint16_t>(port);
    url = url.substr(0, colon);
  }
  if (!url.empty())
    ep.host = std::string(url);
  return ep;
}

struct ClientOptions
{
  std::string client_id = "semloc-engine";
  std::uint16_t keep_alive_s = 30;
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::milliseconds max_backoff{8000};
};

/**
 * Bus over an MQTT broker.
 *
 * A reader thread owns the socket's receive side and hands PUBLISH messages
 * to subscribers in arrival order. On disconnect it reconnects with
 * exponential backoff capped at max_backoff and re-subscribes every filter.
 * Messages published while disconnected are dropped (QoS 0).
 */
class Client : public Bus
{
public:
  Client(Endpoint endpoint, ClientOptions options = {}) : endpoint_(std::move(endpoint)), options_(std::move(options)) {}

  ~Client() override { stop(); }

  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void start()
  {
    if (reader_.joinable())
      return;
    stopping_ = false;
    reader_ = std::thread([this] { reader_loop(); });
  }

  void stop()
  {
    stopping_ = true;
    {
      std::lock_guard lock(write_mutex_);
      if (fd_ >= 0)
      {
        send_all(encode_disconnect());
        ::shutdown(fd_, SHUT_RDWR);
      }
    }
    if (reader_.joinable())
      reader_.join();
    close_socket();
  }

  void subscribe(const std::string& filter, Handler handler) override
  {
    {
      std::lock_guard lock(subs_mutex_);
      subscriptions_.emplace_back(filter, std::move(handler));
    }
    std::lock_guard lock(write_mutex_);
    if (fd_ >= 0 && connected_)
      send_all(encode_subscribe(next_packet_id(), filter));
  }

  void publish(const std::string& topic, const std::string& payload) override
  {
    std::lock_guard lock(write_mutex_);
    if (fd_ < 0 || !connected_ || !send_all(encode_publish(topic, payload)))
      ++dropped_;
  }

  bool connected() const { return connected_.load(); }
  std::size_t connections() const { return connections_.load(); }
  std::size_t dropped() const { return dropped_.load(); }

  /// Blocks until connected or the timeout expires.
  bool wait_connected(std::chrono::milliseconds timeout) const
  {
    const auto until = std::chrono::steady_clock::now() + timeout;
    while (!connected_ && std::chrono::steady_clock::now() < until)
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    return connected_;
  }

private:
  std::uint16_t next_packet_id()
  {
    packet_id_ = static_cast<std::uint16_t>(packet_id_ % 0xFFFF + 1);
    return packet_id_;
  }

  bool send_all(const Bytes& data)
  {
    std::size_t sent = 0;
    while (sent < data.size())
    {
      const auto n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n <= 0)
        return false;
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  void close_socket()
  {
    std::lock_guard lock(write_mutex_);
    connected_ = false;
    if (fd_ >= 0)
    {
      ::close(fd_);
      fd_ = -1;
    }
  }

  int open_socket() const
  {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(endpoint_.host.c_str(), std::to_string(endpoint_.port).c_str(), &hints, &res) != 0)
      return -1;
    int fd = -1;
    for (auto* ai = res; ai; ai = ai->ai_next)
    {
      fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0)
        continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0)
        break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    return fd;
  }

  /// Opens the socket and sends CONNECT plus every subscription. CONNACK is awaited by the reader.
  bool connect_once()
  {
    const int fd = open_socket();
    if (fd < 0)
      return false;
    std::lock_guard lock(write_mutex_);
    fd_ = fd;
    if (!send_all(encode_connect(options_.client_id, options_.keep_alive_s)))
      return false;
    return true;
  }

  void resubscribe()
  {
    std::vector<std::string> filters;
    {
      std::lock_guard lock(subs_mutex_);
      for (const auto& [f, h] : subscriptions_)
        filters.push_back(f);
    }
    std::lock_guard lock(write_mutex_);
    for (const auto& f : filters)
      send_all(encode_subscribe(next_packet_id(), f));
  }

  void dispatch(const Packet& p)
  {
    switch (p.type)
    {
      case kConnAck:
        if (p.body.size() >= 2 && p.body[1] == 0)
        {
          connected_ = true;
          ++connections_;
          resubscribe();
        }
        break;
      case kPublish:
      {
        const auto [topic, payload] = decode_publish(p);
        std::vector<Handler> targets;
        {
          std::lock_guard lock(subs_mutex_);
          for (const auto& [f, h] : subscriptions_)
            if (topic_matches(f, topic))
              targets.push_back(h);
        }
        for (const auto& h : targets)
          h(topic, payload);
        break;
      }
      default:
        break;
    }
  }

  /// Serves one connection until it drops; false if the connection failed outright.
  bool serve_connection()
  {
    Bytes buf;
    std::uint8_t chunk[4096];
    auto last_ping = std::chrono::steady_clock::now();
    const auto ping_every = std::chrono::seconds(std::max<int>(1, options_.keep_alive_s / 2));
    while (!stopping_)
    {
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, 100);
      if (ready < 0)
        return false;
      if (ready > 0)
      {
        const auto n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n <= 0)
          return false;
        buf.insert(buf.end(), chunk, chunk + n);
        try
        {
          for (const auto& p : take_packets(buf))
            dispatch(p);
        }
        catch (const ValidationError&)
        {
          return false;
        }
      }
      if (connected_ && std::chrono::steady_clock::now() - last_ping >= ping_every)
      {
        std::lock_guard lock(write_mutex_);
        send_all(encode_pingreq());
        last_ping = std::chrono::steady_clock::now();
      }
    }
    return true;
  }

  void reader_loop()
  {
    auto backoff = options_.initial_backoff;
    while (!stopping_)
    {
      if (connect_once())
      {
        serve_connection();
        if (connected_)
          backoff = options_.initial_backoff;
      }
      close_socket();
      if (stopping_)
        break;
      const auto until = std::chrono::steady_clock::now() + backoff;
      while (!stopping_ && std::chrono::steady_clock::now() < until)
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      backoff = std::min(backoff * 2, options_.max_backoff);
    }
  }

  Endpoint endpoint_;
  ClientOptions options_;
  std::thread reader_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> connected_{false};
  std::atomic<std::size_t> connections_{0};
  std::atomic<std::size_t> dropped_{0};
  std::mutex write_mutex_;
  std::mutex subs_mutex_;
  std::vector<std::pair<std::string, Handler>> subscriptions_;
  int fd_ = -1;
  std::uint16_t packet_id_ = 0;
};

}  // namespace semloc::mqtt

#endif  // SEMLOC_MQTT_HPP_
