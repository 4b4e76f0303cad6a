#ifndef SEMLOC_RANGING_SIM_HPP_
#define SEMLOC_RANGING_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semloc/sod.hpp"
#include "semloc/types.hpp"

namespace semloc
{
using Rng = std::mt19937_64;

inline constexpr double kDefaultMaxPlausible = 1000.0;

/**
 * UWB time-of-flight error model.
 *
 * bias(d) is piecewise linear through bias_points (distance, bias) and held
 * constant outside them. Negative bias means the radio underestimates.
 */
struct NoiseModel
{
  std::vector<std::pair<double, double>> bias_points;
  double jitter_sigma = 0.0;
  double outlier_probability = 0.0;
  double outlier_magnitude = 1500.0;

  /// Exact ranging, no bias, no jitter, no outliers.
  static NoiseModel zero() { return {}; }

  /// Short-range underestimation ramping from -0.375 m at contact to zero at 1.5 m.
  static NoiseModel testbed_default()
  {
    NoiseModel m;
    m.bias_points = {{0.0, -0.375}, {1.5, 0.0}};
    m.jitter_sigma = 0.05;
    m.outlier_probability = 0.001;
    m.outlier_magnitude = 1500.0;
    return m;
  }

  double bias(double d) const
  {
    if (bias_points.empty())
      return 0.0;
    if (d <= bias_points.front().first)
      return bias_points.front().second;
    if (d >= bias_points.back().first)
      return bias_points.back().second;
    auto hi = std::upper_bound(bias_points.begin(), bias_points.end(), d,
                               [](double v, const auto& p) { return v < p.first; });
    auto lo = std::prev(hi);
    const double t = (d - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
  }

  void validate() const
  {
    if (!(jitter_sigma >= 0.0))
      throw ValidationError("noise model: jitter sigma must be >= 0");
    if (!(outlier_probability >= 0.0 && outlier_probability <= 1.0))
      throw ValidationError("noise model: outlier probability must lie in [0, 1]");
    if (!(outlier_magnitude > 0.0))
      throw ValidationError("noise model: outlier magnitude must be > 0");
    for (std::size_t i = 1; i < bias_points.size(); ++i)
      if (!(bias_points[i].first > bias_points[i - 1].first))
        throw ValidationError("noise model: bias points must have strictly increasing distances");
  }
};

/// Draws one simulated distance for a pair of nodes truly d metres apart.
inline double sample_ranging(double true_distance, const NoiseModel& model, Rng& rng)
{
  if (!(true_distance >= 0.0))
    throw ValidationError("sample_ranging: true distance must be >= 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (model.outlier_probability > 0.0 && unit(rng) < model.outlier_probability)
    return model.outlier_magnitude * (1.0 + unit(rng));
  double jitter = 0.0;
  if (model.jitter_sigma > 0.0)
    jitter = std::normal_distribution<double>(0.0, model.jitter_sigma)(rng);
  return std::max(0.0, true_distance + model.bias(true_distance) + jitter);
}

/// Keeps the samples whose distance is at most max_plausible, in order.
inline std::vector<RangingSample> filter_outliers(std::span<const RangingSample> samples,
                                                  double max_plausible = kDefaultMaxPlausible)
{
  if (!(max_plausible > 0.0))
    throw ValidationError("filter_outliers: max plausible distance must be > 0");
  std::vector<RangingSample> kept;
  kept.reserve(samples.size());
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(kept),
               [&](const RangingSample& s) { return s.distance <= max_plausible; });
  return kept;
}

inline double median(std::vector<double> values)
{
  if (values.empty())
    throw ValidationError("median of an empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1)
    return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

/// Median of a burst of samples taken between one pair of objects.
inline RangingEstimate aggregate(std::span<const RangingSample> samples)
{
  if (samples.empty())
    throw ValidationError("aggregate: no samples");
  const auto& first = samples.front();
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples)
  {
    const bool same = (s.a == first.a && s.b == first.b) || (s.a == first.b && s.b == first.a);
    if (!same)
      throw ValidationError("aggregate: samples mix pairs (" + first.a + "," + first.b + ") and (" + s.a + "," +
                            s.b + ")");
    values.push_back(s.distance);
  }
  return {first.a, first.b, median(std::move(values)), samples.size(), DistanceSemantics::InterCentre};
}

struct RailScenario
{
  std::vector<ObjectDescriptor> fixed_nodes;
  ObjectId mobile_id = "M";
  Vec3 mobile_start;
  Vec3 axis{1.0, 0.0, 0.0};
  double step_length = 0.25;
  int step_count = 28;
  int samples_per_position = 1000;
  double rail_length = 7.0;
  double max_plausible = kDefaultMaxPlausible;

  Vec3 position(int k) const
  {
    const double n = axis.norm();
    return mobile_start + (k * step_length / n) * axis;
  }

  void validate() const
  {
    if (!(step_length > 0.0))
      throw ValidationError("rail scenario: step length must be > 0");
    if (step_count < 0)
      throw ValidationError("rail scenario: step count must be >= 0");
    if (samples_per_position < 1)
      throw ValidationError("rail scenario: samples per position must be >= 1");
    if (!(axis.norm() > 0.0))
      throw ValidationError("rail scenario: axis must be non-zero");
    if (step_length * step_count > rail_length + 1e-9)
      throw ValidationError("rail scenario: span exceeds the rail length");
    if (fixed_nodes.empty())
      throw ValidationError("rail scenario: no fixed nodes");
    for (const auto& n : fixed_nodes)
      if (!n.centre)
        throw ValidationError("rail scenario: fixed node '" + n.id + "' has no position");
  }
};

struct NodeObservation
{
  ObjectId node;
  double true_distance = 0.0;
  std::optional<RangingEstimate> estimate;  ///< empty when every sample was an outlier
  std::size_t outliers_removed = 0;
  std::vector<double> raw;  ///< unfiltered samples, in draw order
};

struct TraceEntry
{
  int index = 0;
  Vec3 position;
  std::vector<NodeObservation> nodes;

  const NodeObservation& node(const ObjectId& id) const
  {
    for (const auto& n : nodes)
      if (n.node == id)
        return n;
    throw ValidationError("trace entry has no node '" + id + "'");
  }
};

using Trace = std::vector<TraceEntry>;

namespace detail
{
inline Rng position_rng(std::uint64_t seed, int position, std::size_t node)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(position), static_cast<std::uint32_t>(node)};
  return Rng(seq);
}
}  // namespace detail

/**
 * Moves the mobile node along the rail and ranges it against every fixed node.
 *
 * Each (position, node) burst draws from its own generator seeded from
 * (seed, position, node), so results do not depend on evaluation order.
 */
inline Trace run_rail_scenario(const RailScenario& scenario, const NoiseModel& model, std::uint64_t seed,
                               bool keep_raw = true)
{
  scenario.validate();
  model.validate();
  Trace trace;
  trace.reserve(static_cast<std::size_t>(scenario.step_count) + 1);
  const auto n = static_cast<std::size_t>(scenario.samples_per_position);
  for (int k = 0; k <= scenario.step_count; ++k)
  {
    TraceEntry entry;
    entry.index = k;
    entry.position = scenario.position(k);
    for (std::size_t j = 0; j < scenario.fixed_nodes.size(); ++j)
    {
      const auto& node = scenario.fixed_nodes[j];
      NodeObservation obs;
      obs.node = node.id;
      obs.true_distance = distance(entry.position, *node.centre);
      Rng rng = detail::position_rng(seed, k, j);
      std::vector<RangingSample> samples;
      samples.reserve(n);
      for (std::size_t s = 0; s < n; ++s)
      {
        const double t = (static_cast<double>(k) * static_cast<double>(n) + static_cast<double>(s)) * 1e-3;
        samples.push_back({scenario.mobile_id, node.id, sample_ranging(obs.true_distance, model, rng), t});
      }
      const auto kept = filter_outliers(samples, scenario.max_plausible);
      obs.outliers_removed = samples.size() - kept.size();
      if (!kept.empty())
        obs.estimate = aggregate(kept);
      if (keep_raw)
      {
        obs.raw.reserve(n);
        for (const auto& s : samples)
          obs.raw.push_back(s.distance);
      }
      entry.nodes.push_back(std::move(obs));
    }
    trace.push_back(std::move(entry));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// JSON

inline NoiseModel load_noise_model(const nlohmann::json& j)
{
  NoiseModel m;
  if (j.contains("bias_points_m"))
    for (const auto& p : j.at("bias_points_m"))
      m.bias_points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  m.jitter_sigma = j.value("jitter_sigma_m", 0.0);
  m.outlier_probability = j.value("outlier_probability", 0.0);
  m.outlier_magnitude = j.value("outlier_magnitude_m", 1500.0);
  m.validate();
  return m;
}

inline nlohmann::json to_json(const NoiseModel& m)
{
  nlohmann::json points = nlohmann::json::array();
  for (const auto& [d, b] : m.bias_points)
    points.push_back({d, b});
  return {{"bias_points_m", points},
          {"jitter_sigma_m", m.jitter_sigma},
          {"outlier_probability", m.outlier_probability},
          {"outlier_magnitude_m", m.outlier_magnitude}};
}

inline RailScenario load_rail_scenario(const nlohmann::json& j)
{
  RailScenario s;
  s.fixed_nodes = load_sod(j.at("fixed_nodes")).objects();
  for (auto& n : s.fixed_nodes)
    n.role = Role::FixedReference;
  s.mobile_id = j.value("mobile_id", std::string("M"));
  s.mobile_start = detail::parse_vec3(j.at("mobile_start"), "mobile_start");
  if (j.contains("axis"))
    s.axis = detail::parse_vec3(j.at("axis"), "axis");
  s.step_length = j.value("step_length_m", 0.25);
  s.step_count = j.value("step_count", 28);
  s.samples_per_position = j.value("samples_per_position", 1000);
  s.rail_length = j.value("rail_length_m", 7.0);
  s.max_plausible = j.value("max_plausible_m", kDefaultMaxPlausible);
  s.validate();
  return s;
}

/// One line-delimited record per rail position.
inline nlohmann::json to_json(const TraceEntry& e, bool with_raw = false)
{
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : e.nodes)
  {
    nlohmann::json r = {{"id", n.node},
                        {"true_distance_m", n.true_distance},
                        {"estimate_m", n.estimate ? nlohmann::json(n.estimate->distance) : nlohmann::json(nullptr)},
                        {"sample_count", n.estimate ? n.estimate->sample_count : 0},
                        {"outliers_removed", n.outliers_removed}};
    if (with_raw)
      r["samples_m"] = n.raw;
    nodes.push_back(std::move(r));
  }
  return {{"index", e.index}, {"position", {e.position.x, e.position.y, e.position.z}}, {"nodes", nodes}};
}

inline TraceEntry trace_entry_from_json(const nlohmann::json& j)
{
  TraceEntry e;
  e.index = j.at("index").get<int>();
  e.position = detail::parse_vec3(j.at("position"), "trace position");
  for (const auto& r : j.at("nodes"))
  {
    NodeObservation n;
    n.node = r.at("id").get<std::string>();
    n.true_distance = r.at("true_distance_m").get<double>();
    if (!r.at("estimate_m").is_null())
      n.estimate = RangingEstimate{"", n.node, r.at("estimate_m").get<double>(), r.at("sample_count").get<std::size_t>(),
                                   DistanceSemantics::InterCentre};
    n.outliers_removed = r.value("outliers_removed", std::size_t{0});
    if (r.contains("samples_m"))
      n.raw = r.at("samples_m").get<std::vector<double>>();
    e.nodes.push_back(std::move(n));
  }
  return e;
}

}  // namespace semloc

#endif  // SEMLOC_RANGING_SIM_HPP_
