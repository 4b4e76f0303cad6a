#ifndef SEMLOC_PROXIMITY_HPP_
#define SEMLOC_PROXIMITY_HPP_

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semloc/phrases.hpp"
#include "semloc/sod.hpp"
#include "semloc/types.hpp"

namespace semloc
{
/// Upper bounds (exclusive) of the three proximity bands, in metres.
struct ProximityThresholds
{
  double very_close_max = 0.3;
  double near_max = 0.6;
  double vicinity_max = 1.2;

  void validate() const
  {
    if (!(0.0 < very_close_max && very_close_max < near_max && near_max < vicinity_max))
      throw ValidationError("proximity thresholds must satisfy 0 < very close < near < vicinity");
  }
};

/// Maps a distance onto the half-open bands [0, vc), [vc, n), [n, v); beyond v there is no relation.
inline std::optional<ProximityClass> classify_proximity(double distance, const ProximityThresholds& t = {})
{
  if (!(distance >= 0.0))
    throw ValidationError("classify_proximity: distance must be >= 0");
  if (distance < t.very_close_max)
    return ProximityClass::VeryClose;
  if (distance < t.near_max)
    return ProximityClass::Near;
  if (distance < t.vicinity_max)
    return ProximityClass::InVicinity;
  return std::nullopt;
}

/// Distance from the target to one reference object.
struct ReferenceDistance
{
  ObjectId reference;
  double distance = 0.0;
};

/**
 * Proximity Estimator.
 *
 * Produces one fragment per reference within the vicinity band. With
 * nearest_only, only the reference at minimal distance is considered, and it
 * yields a fragment only if it is itself within the vicinity band. Ties on
 * distance keep the first reference in input order.
 */
inline std::vector<SpdFragment> proximity_estimator(const ObjectId& target, std::span<const ReferenceDistance> references,
                                                    const SodDatabase& sod, const ProximityThresholds& thresholds,
                                                    bool nearest_only, const PhraseTemplates& phrases = {})
{
  if (!sod.contains(target))
    throw ValidationError("proximity_estimator: unknown target '" + target + "'");
  for (const auto& r : references)
  {
    if (!sod.contains(r.reference))
      throw ValidationError("proximity_estimator: unknown reference '" + r.reference + "'");
    if (r.reference == target)
      throw ValidationError("proximity_estimator: target '" + target + "' used as its own reference");
  }

  auto make = [&](const ReferenceDistance& r) -> std::optional<SpdFragment> {
    const auto cls = classify_proximity(r.distance, thresholds);
    if (!cls)
      return std::nullopt;
    SpdFragment f;
    f.kind = FragmentKind::Proximity;
    f.subject = target;
    f.references = {r.reference};
    f.detail = cls;
    f.distance = r.distance;
    f.text = substitute(phrases.for_class(*cls), "<label>", sod.at(r.reference).label);
    return f;
  };

  std::vector<SpdFragment> out;
  if (nearest_only)
  {
    if (references.empty())
      return out;
    const auto nearest = std::min_element(references.begin(), references.end(),
                                          [](const auto& x, const auto& y) { return x.distance < y.distance; });
    if (auto f = make(*nearest))
      out.push_back(std::move(*f));
    return out;
  }
  for (const auto& r : references)
    if (auto f = make(r))
      out.push_back(std::move(*f));
  return out;
}

}  // namespace semloc

#endif  // SEMLOC_PROXIMITY_HPP_
