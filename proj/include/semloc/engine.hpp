#ifndef SEMLOC_ENGINE_HPP_
#define SEMLOC_ENGINE_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semloc/alignment.hpp"
#include "semloc/bus.hpp"
#include "semloc/combiner.hpp"
#include "semloc/config.hpp"
#include "semloc/proximity.hpp"
#include "semloc/room.hpp"
#include "semloc/sod.hpp"
#include "semloc/types.hpp"

namespace semloc
{
/// Payload of a ranging/<a>/<b> message: {a, b, distance_m, timestamp[, sample_count, semantics]}.
struct RangingMessage
{
  RangingEstimate estimate;
  std::optional<double> timestamp;
};

inline RangingMessage parse_ranging_message(const std::string& payload)
{
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(payload);
  }
  catch (const nlohmann::json::parse_error& e)
  {
    throw ValidationError(std::string("ranging message is not JSON: ") + e.what());
  }
  if (!j.is_object())
    throw ValidationError("ranging message must be an object");
  RangingMessage m;
  try
  {
    m.estimate.a = j.at("a").get<std::string>();
    m.estimate.b = j.at("b").get<std::string>();
    m.estimate.distance = j.at("distance_m").get<double>();
    m.estimate.sample_count = j.value("sample_count", std::size_t{1});
    if (j.contains("semantics"))
      m.estimate.semantics = parse_semantics(j.at("semantics").get<std::string>());
    if (j.contains("timestamp") && !j.at("timestamp").is_null())
      m.timestamp = j.at("timestamp").get<double>();
  }
  catch (const nlohmann::json::exception& e)
  {
    throw ValidationError(std::string("ranging message: ") + e.what());
  }
  if (m.estimate.a == m.estimate.b)
    throw ValidationError("ranging message pairs '" + m.estimate.a + "' with itself");
  if (!(m.estimate.distance >= 0.0) || !std::isfinite(m.estimate.distance))
    throw ValidationError("ranging message distance must be finite and >= 0");
  if (m.estimate.sample_count < 1)
    throw ValidationError("ranging message sample count must be >= 1");
  return m;
}

inline std::string to_payload(const RangingEstimate& e, double timestamp)
{
  nlohmann::json j = {{"a", e.a}, {"b", e.b}, {"distance_m", e.distance}, {"timestamp", timestamp}};
  if (e.sample_count != 1)
    j["sample_count"] = e.sample_count;
  if (e.semantics != DistanceSemantics::InterCentre)
    j["semantics"] = std::string(to_string(e.semantics));
  return j.dump();
}

/// Latest estimate per unordered object pair; entries older than the staleness window are invisible.
class DistanceCache
{
public:
  struct Entry
  {
    RangingEstimate estimate;
    double last_update = 0.0;
  };

  explicit DistanceCache(double staleness_s = 60.0) : staleness_(staleness_s) {}

  void set_staleness(double s) { staleness_ = s; }
  double staleness() const { return staleness_; }

  /// Stores the estimate unless the cache already holds a strictly newer one for the pair.
  bool update(const RangingEstimate& e, double timestamp)
  {
    auto key = make_key(e.a, e.b);
    auto it = entries_.find(key);
    if (it != entries_.end() && it->second.last_update > timestamp)
      return false;
    entries_[std::move(key)] = Entry{e, timestamp};
    return true;
  }

  std::optional<Entry> get(const ObjectId& a, const ObjectId& b, double now) const
  {
    auto it = entries_.find(make_key(a, b));
    if (it == entries_.end() || !fresh(it->second, now))
      return std::nullopt;
    return it->second;
  }

  /// Fresh entries involving id, as (other object, entry), ordered by the other object's id.
  std::vector<std::pair<ObjectId, Entry>> involving(const ObjectId& id, double now) const
  {
    std::vector<std::pair<ObjectId, Entry>> out;
    for (const auto& [key, entry] : entries_)
    {
      if (!fresh(entry, now))
        continue;
      if (key.first == id)
        out.emplace_back(key.second, entry);
      else if (key.second == id)
        out.emplace_back(key.first, entry);
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
  }

  std::size_t size() const { return entries_.size(); }
  bool contains(const ObjectId& a, const ObjectId& b) const { return entries_.count(make_key(a, b)) != 0; }

private:
  using Key = std::pair<ObjectId, ObjectId>;

  static Key make_key(const ObjectId& a, const ObjectId& b) { return a < b ? Key{a, b} : Key{b, a}; }
  bool fresh(const Entry& e, double now) const { return now - e.last_update <= staleness_; }

  double staleness_;
  std::map<Key, Entry> entries_;
};

struct EngineCounters
{
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t unknown_id = 0;
  std::size_t implausible = 0;
  std::size_t out_of_order = 0;
};

/**
 * Owns the distance cache and runs the micro-algorithms over it.
 *
 * Not thread-safe: callers serialise ingest and evaluate (EngineService does
 * so with its event loop).
 */
class Engine
{
public:
  Engine(SodDatabase sod, EngineConfig config) : sod_(std::move(sod)), config_(std::move(config)), cache_(config_.staleness_s)
  {
    config_.validate();
  }

  const SodDatabase& sod() const { return sod_; }
  const EngineConfig& config() const { return config_; }
  const DistanceCache& cache() const { return cache_; }
  const EngineCounters& counters() const { return counters_; }

  void set_config(EngineConfig c)
  {
    c.validate();
    config_ = std::move(c);
    cache_.set_staleness(config_.staleness_s);
  }

  /**
   * Applies one decoded message. Returns the mobile objects whose description
   * may have changed; empty when the message was dropped.
   */
  std::vector<ObjectId> ingest(const RangingMessage& m, double now)
  {
    const auto& e = m.estimate;
    if (!sod_.contains(e.a) || !sod_.contains(e.b))
    {
      ++counters_.unknown_id;
      return {};
    }
    if (e.distance > config_.max_plausible_m)
    {
      ++counters_.implausible;
      return {};
    }
    if (!cache_.update(e, m.timestamp.value_or(now)))
    {
      ++counters_.out_of_order;
      return {};
    }
    ++counters_.accepted;
    return affected_targets(e.a, e.b);
  }

  /// Decodes and applies a raw bus message; never throws on bad input.
  std::vector<ObjectId> ingest_payload(const std::string& topic, const std::string& payload, double now)
  {
    RangingMessage m;
    try
    {
      m = parse_ranging_message(payload);
    }
    catch (const ValidationError&)
    {
      ++counters_.malformed;
      return {};
    }
    std::string ta, tb;
    if (TopicScheme::parse_ranging(topic, ta, tb))
    {
      const bool same = (ta == m.estimate.a && tb == m.estimate.b) || (ta == m.estimate.b && tb == m.estimate.a);
      if (!same)
      {
        ++counters_.malformed;
        return {};
      }
    }
    return ingest(m, now);
  }

  /// Description of target from the fresh cache entries at time now.
  Spd evaluate(const ObjectId& target, double now) const
  {
    const auto& subject = sod_.at(target);
    const auto entries = cache_.involving(target, now);

    std::vector<SpdFragment> fragments;

    if (config_.room_enabled)
    {
      std::vector<ReferenceDistance> neighbours;
      for (const auto& [other, entry] : entries)
        neighbours.push_back({other, entry.estimate.distance});
      if (auto f = room_determination(target, neighbours, sod_, config_.room_vote, config_.phrases))
        fragments.push_back(std::move(*f));
    }

    std::vector<ReferenceDistance> references;
    std::vector<ReferenceDistance> centre_distances;
    for (const auto& [other, entry] : entries)
    {
      const auto& ref = sod_.at(other);
      if (!ref.is_fixed())
        continue;
      references.push_back({other, convert(entry.estimate, subject, ref, config_.proximity_semantics)});
      centre_distances.push_back({other, convert(entry.estimate, subject, ref, DistanceSemantics::InterCentre)});
    }

    if (config_.proximity_enabled && !references.empty())
    {
      auto p = proximity_estimator(target, references, sod_, config_.thresholds, config_.nearest_only, config_.phrases);
      fragments.insert(fragments.end(), p.begin(), p.end());
    }

    if (config_.alignment_enabled)
    {
      auto pairs = alignment_pairs(centre_distances, now);
      auto a = alignment_estimator(target, pairs, sod_, config_.alignment, config_.phrases);
      fragments.insert(fragments.end(), a.begin(), a.end());
    }

    return combine(fragments, target, config_.capitalize_first);
  }

  /// Mobile objects with at least one fresh cache entry, in SOD order.
  std::vector<ObjectId> tracked_targets(double now) const
  {
    std::vector<ObjectId> out;
    for (const auto& o : sod_.objects())
      if (!o.is_fixed() && !cache_.involving(o.id, now).empty())
        out.push_back(o.id);
    return out;
  }

private:
  std::vector<ObjectId> affected_targets(const ObjectId& a, const ObjectId& b) const
  {
    std::vector<ObjectId> out;
    if (!sod_.at(a).is_fixed())
      out.push_back(a);
    if (!sod_.at(b).is_fixed())
      out.push_back(b);
    if (out.empty())
      // A reference-to-reference range can change alignment for every tracked object.
      for (const auto& o : sod_.objects())
        if (!o.is_fixed() && (cache_.contains(o.id, a) || cache_.contains(o.id, b)))
          out.push_back(o.id);
    return out;
  }

  static double convert(const RangingEstimate& e, const ObjectDescriptor& x, const ObjectDescriptor& y,
                        DistanceSemantics wanted)
  {
    if (e.semantics == wanted)
      return e.distance;
    if (wanted == DistanceSemantics::EdgeToEdge)
      return edge_to_edge(e.distance, x.bounding_radius, y.bounding_radius);
    return inter_centre(e.distance, x.bounding_radius, y.bounding_radius);
  }

  std::vector<AlignmentPair> alignment_pairs(const std::vector<ReferenceDistance>& refs, double now) const
  {
    std::vector<AlignmentPair> pairs;
    for (std::size_t i = 0; i < refs.size(); ++i)
      for (std::size_t j = i + 1; j < refs.size(); ++j)
      {
        const auto& ra = refs[i];
        const auto& rb = refs[j];
        if (!(ra.distance > 0.0) || !(rb.distance > 0.0))
          continue;
        AlignmentPair p{ra.reference, rb.reference, ra.distance, rb.distance, std::nullopt};
        if (!sod_.known_distance(ra.reference, rb.reference))
        {
          const auto measured = cache_.get(ra.reference, rb.reference, now);
          if (!measured)
            continue;
          p.measured_a_to_b = convert(measured->estimate, sod_.at(ra.reference), sod_.at(rb.reference),
                                      DistanceSemantics::InterCentre);
          if (!(*p.measured_a_to_b > 0.0))
            continue;
        }
        pairs.push_back(std::move(p));
      }
    // Keep references in SOD order so "between A and B" reads the same on every evaluation.
    const auto order = [&](const ObjectId& id) {
      const auto& objs = sod_.objects();
      return std::find_if(objs.begin(), objs.end(), [&](const auto& o) { return o.id == id; }) - objs.begin();
    };
    for (auto& p : pairs)
      if (order(p.ref_b) < order(p.ref_a))
      {
        std::swap(p.ref_a, p.ref_b);
        std::swap(p.target_to_a, p.target_to_b);
      }
    std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& x, const auto& y) {
      return std::pair(order(x.ref_a), order(x.ref_b)) < std::pair(order(y.ref_a), order(y.ref_b));
    });
    return pairs;
  }

  SodDatabase sod_;
  EngineConfig config_;
  DistanceCache cache_;
  EngineCounters counters_;
};

inline nlohmann::json to_json(const Spd& spd)
{
  nlohmann::json frags = nlohmann::json::array();
  for (const auto& f : spd.fragments)
  {
    static constexpr const char* kinds[] = {"room", "proximity", "alignment"};
    nlohmann::json jf = {{"kind", kinds[static_cast<int>(f.kind)]}, {"references", f.references}, {"text", f.text}};
    if (f.detail)
      jf["class"] = std::string(class_code(f.detail));
    frags.push_back(std::move(jf));
  }
  return {{"subject", spd.subject}, {"rendered", spd.rendered}, {"fragments", frags}};
}

}  // namespace semloc

#endif  // SEMLOC_ENGINE_HPP_
