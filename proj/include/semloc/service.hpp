#ifndef SEMLOC_SERVICE_HPP_
#define SEMLOC_SERVICE_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include <json.hpp>

#include "semloc/bus.hpp"
#include "semloc/config.hpp"
#include "semloc/engine.hpp"

namespace semloc
{
/// Settable time source for replays and tests.
class ManualClock
{
public:
  double now() const { return now_.load(); }
  void set(double t) { now_.store(t); }
  void advance(double dt) { now_.store(now_.load() + dt); }

private:
  std::atomic<double> now_{0.0};
};

/// Seconds since the Unix epoch, matching the timestamps publishers put in payloads.
inline double wall_clock_seconds()
{
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

struct ServiceCounters
{
  std::size_t received = 0;
  std::size_t published = 0;
  std::size_t suppressed = 0;  ///< evaluations whose rendered SPD had not changed
  std::size_t config_reloads = 0;
  std::size_t config_errors = 0;
};

/**
 * Event loop around an Engine.
 *
 * Bus handlers only enqueue; every cache mutation and evaluation happens in
 * pump(), which callers run from a single thread. A target touched at time t
 * is evaluated once the clock reaches t + debounce, and spd/<id> is published
 * only when the rendered string differs from the last one published.
 */
class EngineService
{
public:
  using Clock = std::function<double()>;

  EngineService(Bus& bus, Engine& engine, Clock clock) : bus_(bus), engine_(engine), clock_(std::move(clock)) {}

  EngineService(const EngineService&) = delete;
  EngineService& operator=(const EngineService&) = delete;

  void start()
  {
    auto handler = [this](const std::string& topic, const std::string& payload) { enqueue(topic, payload); };
    bus_.subscribe(std::string(TopicScheme::kRangingFilter), handler);
    bus_.subscribe(std::string(TopicScheme::kConfigTopic), handler);
  }

  /// Thread-safe; called from bus transport threads. The arrival time starts the debounce window.
  void enqueue(const std::string& topic, const std::string& payload)
  {
    const double arrived = clock_();
    {
      std::lock_guard lock(queue_mutex_);
      queue_.push_back({topic, payload, arrived});
    }
    queue_cv_.notify_one();
  }

  /// Drains queued messages, then publishes every target whose debounce window has elapsed.
  std::size_t pump()
  {
    std::deque<Queued> batch;
    {
      std::lock_guard lock(queue_mutex_);
      batch.swap(queue_);
    }
    for (const auto& q : batch)
      handle(q.topic, q.payload, q.arrived);
    return publish_due(false);
  }

  /// Publishes every pending target regardless of its deadline.
  std::size_t flush()
  {
    pump();
    return publish_due(true);
  }

  /// Runs until stop is set, then drains what was already received.
  void run(const std::atomic<bool>& stop, std::chrono::milliseconds tick = std::chrono::milliseconds(20))
  {
    while (!stop.load())
    {
      {
        std::unique_lock lock(queue_mutex_);
        queue_cv_.wait_for(lock, tick, [&] { return !queue_.empty() || stop.load(); });
      }
      pump();
    }
    flush();
  }

  const ServiceCounters& counters() const { return counters_; }
  const std::map<ObjectId, std::string>& last_published() const { return last_published_; }
  std::size_t pending() const { return pending_.size(); }

private:
  struct Queued
  {
    std::string topic;
    std::string payload;
    double arrived;
  };

  void handle(const std::string& topic, const std::string& payload, double now)
  {
    ++counters_.received;
    if (topic == TopicScheme::kConfigTopic)
    {
      try
      {
        engine_.set_config(load_config(nlohmann::json::parse(payload), engine_.config()));
        ++counters_.config_reloads;
        for (const auto& id : engine_.tracked_targets(now))
          mark(id, now);
      }
      catch (const std::exception&)
      {
        ++counters_.config_errors;
      }
      return;
    }
    for (const auto& id : engine_.ingest_payload(topic, payload, now))
      mark(id, now);
  }

  void mark(const ObjectId& id, double now) { pending_.try_emplace(id, now + engine_.config().debounce_s); }

  std::size_t publish_due(bool all)
  {
    const double now = clock_();
    std::size_t n = 0;
    for (auto it = pending_.begin(); it != pending_.end();)
    {
      if (!all && it->second > now)
      {
        ++it;
        continue;
      }
      const Spd spd = engine_.evaluate(it->first, now);
      auto last = last_published_.find(it->first);
      if (last != last_published_.end() && last->second == spd.rendered)
        ++counters_.suppressed;
      else
      {
        auto payload = to_json(spd);
        payload["timestamp"] = now;
        bus_.publish(TopicScheme::spd(it->first), payload.dump());
        last_published_[it->first] = spd.rendered;
        ++counters_.published;
        ++n;
      }
      it = pending_.erase(it);
    }
    return n;
  }

  Bus& bus_;
  Engine& engine_;
  Clock clock_;
  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<Queued> queue_;
  std::map<ObjectId, double> pending_;
  std::map<ObjectId, std::string> last_published_;
  ServiceCounters counters_;
};

/**
 * Replays a recorded session (one ranging payload per line) through the bus,
 * advancing the clock to each message's timestamp. Returns the final clock value.
 */
inline double replay_session(std::istream& in, Bus& bus, EngineService& service, ManualClock& clock)
{
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty() || line.front() == '#')
      continue;
    std::string topic;
    try
    {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("timestamp") && j.at("timestamp").is_number())
        clock.set(std::max(clock.now(), j.at("timestamp").get<double>()));
      topic = TopicScheme::ranging(j.value("a", std::string("?")), j.value("b", std::string("?")));
    }
    catch (const nlohmann::json::exception&)
    {
      topic = TopicScheme::ranging("?", "?");
    }
    bus.publish(topic, line);
    service.pump();
  }
  service.flush();
  return clock.now();
}

}  // namespace semloc

#endif  // SEMLOC_SERVICE_HPP_
