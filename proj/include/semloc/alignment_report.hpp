#ifndef SEMLOC_ALIGNMENT_REPORT_HPP_
#define SEMLOC_ALIGNMENT_REPORT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "semloc/alignment.hpp"
#include "semloc/ranging_sim.hpp"
#include "semloc/types.hpp"

namespace semloc
{
/// Real-geometry category of a rail position relative to the angle threshold.
enum class AngleBucket
{
  AboveThreshold,
  BelowThreshold,
  VerySmall
};

inline std::string_view to_string(AngleBucket b)
{
  switch (b)
  {
    case AngleBucket::AboveThreshold:
      return "above-threshold";
    case AngleBucket::BelowThreshold:
      return "below-threshold";
    case AngleBucket::VerySmall:
      return "very-small";
  }
  return "?";
}

struct AlignmentReportConfig
{
  ObjectId node_b;
  ObjectId node_c;
  double angle_threshold_deg = 30.0;
  /// Positions whose larger real angle is under this fraction of the threshold count as visibly aligned.
  double very_small_fraction = 0.1;
  double max_plausible = kDefaultMaxPlausible;
  /// Zero ranges (full underestimation) are raised to this floor so the law of cosines stays defined.
  double min_range = 1e-6;
};

struct VariantTally
{
  std::size_t aligned = 0;
  std::size_t not_aligned = 0;
  std::size_t undecidable = 0;
  std::size_t success = 0;

  void add(AlignmentVerdict v, bool expect_aligned)
  {
    switch (v)
    {
      case AlignmentVerdict::Aligned:
        ++aligned;
        break;
      case AlignmentVerdict::NotAligned:
        ++not_aligned;
        break;
      case AlignmentVerdict::Undecidable:
        ++undecidable;
        break;
    }
    if ((expect_aligned && v == AlignmentVerdict::Aligned) || (!expect_aligned && v == AlignmentVerdict::NotAligned))
      ++success;
  }
};

struct BucketReport
{
  std::size_t samples = 0;
  std::size_t positions = 0;
  VariantTally original;
  VariantTally revised;

  static double rate(std::size_t n, std::size_t d) { return d == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(d); }
};

struct AlignmentReport
{
  std::array<BucketReport, 3> buckets{};
  std::size_t total_samples = 0;
  std::size_t removed_outliers = 0;

  const BucketReport& bucket(AngleBucket b) const { return buckets[static_cast<std::size_t>(b)]; }
};

/// Real angles at B and C for a mobile at m, from coordinates.
inline TriangleAngles real_angles(const Vec3& b, const Vec3& c, const Vec3& m)
{
  auto angle = [](const Vec3& at, const Vec3& p, const Vec3& q) {
    const Vec3 u = p - at;
    const Vec3 v = q - at;
    const double dot = u.x * v.x + u.y * v.y + u.z * v.z;
    const double cross = Vec3{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x}.norm();
    return std::atan2(cross, dot) * 180.0 / std::numbers::pi;
  };
  return {angle(b, c, m), angle(c, b, m)};
}

inline AngleBucket classify_bucket(const TriangleAngles& real, const AlignmentReportConfig& cfg)
{
  const double worst = std::max(real.at_b, real.at_c);
  if (worst >= cfg.angle_threshold_deg)
    return AngleBucket::AboveThreshold;
  if (worst < cfg.very_small_fraction * cfg.angle_threshold_deg)
    return AngleBucket::VerySmall;
  return AngleBucket::BelowThreshold;
}

/**
 * Runs both alignment variants on every sample pair of a rail trace.
 *
 * The k-th sample to B is paired with the k-th sample to C; a pair is removed
 * when either sample is an outlier. Positions without raw samples fall back
 * to their aggregated estimates as a single pair.
 */
inline AlignmentReport alignment_report(const Trace& trace, const Vec3& pos_b, const Vec3& pos_c,
                                        const AlignmentReportConfig& cfg)
{
  if (trace.empty())
    throw ValidationError("alignment_report: empty trace");
  const double b_c = distance(pos_b, pos_c);
  if (!(b_c > 0.0))
    throw ValidationError("alignment_report: B and C coincide");
  AlignmentConfig acfg{cfg.angle_threshold_deg, AlignmentVariant::Original};

  AlignmentReport report;
  for (const auto& entry : trace)
  {
    const auto& ob = entry.node(cfg.node_b);
    const auto& oc = entry.node(cfg.node_c);
    if (distance(entry.position, pos_b) <= 0.0 || distance(entry.position, pos_c) <= 0.0)
      throw ValidationError("alignment_report: mobile coincides with a reference at position " +
                            std::to_string(entry.index));
    const auto bucket = classify_bucket(real_angles(pos_b, pos_c, entry.position), cfg);
    auto& br = report.buckets[static_cast<std::size_t>(bucket)];
    const bool expect_aligned = bucket != AngleBucket::AboveThreshold;
    ++br.positions;

    std::vector<std::pair<double, double>> pairs;
    if (!ob.raw.empty() && !oc.raw.empty())
    {
      const auto n = std::min(ob.raw.size(), oc.raw.size());
      for (std::size_t k = 0; k < n; ++k)
        pairs.emplace_back(ob.raw[k], oc.raw[k]);
    }
    else if (ob.estimate && oc.estimate)
      pairs.emplace_back(ob.estimate->distance, oc.estimate->distance);
    else
      throw ValidationError("alignment_report: position " + std::to_string(entry.index) + " has no ranges");

    for (auto [b_m, c_m] : pairs)
    {
      ++report.total_samples;
      if (b_m > cfg.max_plausible || c_m > cfg.max_plausible)
      {
        ++report.removed_outliers;
        continue;
      }
      b_m = std::max(b_m, cfg.min_range);
      c_m = std::max(c_m, cfg.min_range);
      ++br.samples;
      br.original.add(alignment_original(b_c, b_m, c_m, acfg), expect_aligned);
      br.revised.add(alignment_revised(b_c, b_m, c_m, acfg), expect_aligned);
    }
  }
  return report;
}

inline nlohmann::json to_json(const AlignmentReport& r)
{
  auto tally = [](const VariantTally& t, std::size_t n) {
    return nlohmann::json{{"aligned", t.aligned},
                          {"not_aligned", t.not_aligned},
                          {"undecidable", t.undecidable},
                          {"success", t.success},
                          {"success_rate", BucketReport::rate(t.success, n)},
                          {"undecidable_rate", BucketReport::rate(t.undecidable, n)}};
  };
  nlohmann::json buckets = nlohmann::json::object();
  for (auto b : {AngleBucket::AboveThreshold, AngleBucket::BelowThreshold, AngleBucket::VerySmall})
  {
    const auto& br = r.bucket(b);
    buckets[std::string(to_string(b))] = {{"positions", br.positions},
                                          {"samples", br.samples},
                                          {"original", tally(br.original, br.samples)},
                                          {"revised", tally(br.revised, br.samples)}};
  }
  return {{"total_samples", r.total_samples}, {"removed_outliers", r.removed_outliers}, {"buckets", buckets}};
}

}  // namespace semloc

#endif  // SEMLOC_ALIGNMENT_REPORT_HPP_
