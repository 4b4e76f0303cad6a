#ifndef SEMLOC_BUS_HPP_
#define SEMLOC_BUS_HPP_

#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semloc
{
/// Topic layout shared by the engine and its publishers.
struct TopicScheme
{
  static constexpr std::string_view kRangingPrefix = "ranging/";
  static constexpr std::string_view kSpdPrefix = "spd/";
  static constexpr std::string_view kRangingFilter = "ranging/+/+";
  static constexpr std::string_view kConfigTopic = "engine/config";

  static std::string ranging(std::string_view a, std::string_view b)
  {
    return std::string(kRangingPrefix) + std::string(a) + "/" + std::string(b);
  }
  static std::string spd(std::string_view id) { return std::string(kSpdPrefix) + std::string(id); }

  /// Splits "ranging/<a>/<b>"; false when the topic has another shape.
  static bool parse_ranging(std::string_view topic, std::string& a, std::string& b)
  {
    if (!topic.starts_with(kRangingPrefix))
      return false;
    topic.remove_prefix(kRangingPrefix.size());
    const auto slash = topic.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == topic.size())
      return false;
    if (topic.find('/', slash + 1) != std::string_view::npos)
      return false;
    a = std::string(topic.substr(0, slash));
    b = std::string(topic.substr(slash + 1));
    return true;
  }
};

/// MQTT-style filter matching: '+' matches one level, a trailing '#' matches the rest.
inline bool topic_matches(std::string_view filter, std::string_view topic)
{
  while (true)
  {
    const auto fs = filter.find('/');
    const auto ts = topic.find('/');
    const auto flevel = filter.substr(0, fs);
    const auto tlevel = topic.substr(0, ts);
    if (flevel == "#")
      return fs == std::string_view::npos;
    if (flevel != "+" && flevel != tlevel)
      return false;
    if (fs == std::string_view::npos || ts == std::string_view::npos)
    {
      if (fs == std::string_view::npos && ts == std::string_view::npos)
        return true;
      // "a/#" also matches "a"
      return ts == std::string_view::npos && filter.substr(fs + 1) == "#";
    }
    filter.remove_prefix(fs + 1);
    topic.remove_prefix(ts + 1);
  }
}

/// Minimal publish/subscribe surface the engine is written against.
class Bus
{
public:
  using Handler = std::function<void(const std::string& topic, const std::string& payload)>;

  virtual ~Bus() = default;
  virtual void subscribe(const std::string& filter, Handler handler) = 0;
  virtual void publish(const std::string& topic, const std::string& payload) = 0;
};

/// In-process bus that delivers synchronously on the publishing thread and keeps a log.
class LoopbackBus : public Bus
{
public:
  struct Message
  {
    std::string topic;
    std::string payload;
  };

  void subscribe(const std::string& filter, Handler handler) override
  {
    std::lock_guard lock(mutex_);
    subscriptions_.emplace_back(filter, std::move(handler));
  }

  void publish(const std::string& topic, const std::string& payload) override
  {
    std::vector<Handler> targets;
    {
      std::lock_guard lock(mutex_);
      log_.push_back({topic, payload});
      for (const auto& [filter, handler] : subscriptions_)
        if (topic_matches(filter, topic))
          targets.push_back(handler);
    }
    for (const auto& h : targets)
      h(topic, payload);
  }

  std::vector<Message> published() const
  {
    std::lock_guard lock(mutex_);
    return log_;
  }

  std::vector<Message> published_on(std::string_view filter) const
  {
    std::lock_guard lock(mutex_);
    std::vector<Message> out;
    for (const auto& m : log_)
      if (topic_matches(filter, m.topic))
        out.push_back(m);
    return out;
  }

private:
  mutable std::mutex mutex_;
  std::vector<std::pair<std::string, Handler>> subscriptions_;
  std::vector<Message> log_;
};

}  // namespace semloc

#endif  // SEMLOC_BUS_HPP_
