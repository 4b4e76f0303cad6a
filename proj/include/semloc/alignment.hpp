#ifndef SEMLOC_ALIGNMENT_HPP_
#define SEMLOC_ALIGNMENT_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semloc/phrases.hpp"
#include "semloc/sod.hpp"
#include "semloc/types.hpp"

namespace semloc
{
enum class AlignmentVariant
{
  Original,
  Revised
};

struct AlignmentConfig
{
  double angle_threshold_deg = 30.0;
  AlignmentVariant variant = AlignmentVariant::Revised;

  void validate() const
  {
    if (!(angle_threshold_deg > 0.0 && angle_threshold_deg < 90.0))
      throw ValidationError("alignment angle threshold must lie in (0, 90) degrees");
  }
};

enum class AlignmentVerdict
{
  Aligned,
  NotAligned,
  Undecidable
};

inline std::string_view to_string(AlignmentVerdict v)
{
  switch (v)
  {
    case AlignmentVerdict::Aligned:
      return "aligned";
    case AlignmentVerdict::NotAligned:
      return "not-aligned";
    case AlignmentVerdict::Undecidable:
      return "undecidable";
  }
  return "undecidable";
}

/// Interior angles, in degrees, at the two reference vertices B and C.
struct TriangleAngles
{
  double at_b = 0.0;
  double at_c = 0.0;
};

/// Cosine arguments within this distance of +-1 are round-off, not a broken triangle.
inline constexpr double kCosineTolerance = 1e-9;

namespace detail
{
inline void require_positive(double b_c, double b_m, double c_m, const char* who)
{
  if (!(b_c > 0.0 && b_m > 0.0 && c_m > 0.0) || !std::isfinite(b_c) || !std::isfinite(b_m) || !std::isfinite(c_m))
    throw ValidationError(std::string(who) + ": distances must be finite and > 0");
}

inline double cosine_at(double adjacent1, double adjacent2, double opposite)
{
  return (adjacent1 * adjacent1 + adjacent2 * adjacent2 - opposite * opposite) / (2.0 * adjacent1 * adjacent2);
}

inline double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

inline bool below_threshold(const TriangleAngles& a, double threshold)
{
  return a.at_b < threshold && a.at_c < threshold;
}
}  // namespace detail

/**
 * Angles at B and C of the triangle B, C, M from its three sides (law of cosines).
 *
 * Returns nothing when the sides violate the triangle inequality, i.e. when
 * either cosine falls outside [-1, 1] by more than round-off.
 */
inline std::optional<TriangleAngles> triangle_angles(double b_c, double b_m, double c_m)
{
  detail::require_positive(b_c, b_m, c_m, "triangle_angles");
  const double cos_b = detail::cosine_at(b_c, b_m, c_m);
  const double cos_c = detail::cosine_at(b_c, c_m, b_m);
  const double limit = 1.0 + kCosineTolerance;
  if (std::abs(cos_b) > limit || std::abs(cos_c) > limit)
    return std::nullopt;
  return TriangleAngles{detail::degrees(std::acos(std::clamp(cos_b, -1.0, 1.0))),
                        detail::degrees(std::acos(std::clamp(cos_c, -1.0, 1.0)))};
}

/// Aligned when both base angles are under the threshold; undecidable when no triangle exists.
inline AlignmentVerdict alignment_original(double b_c, double b_m, double c_m, const AlignmentConfig& config = {})
{
  detail::require_positive(b_c, b_m, c_m, "alignment_original");
  const auto angles = triangle_angles(b_c, b_m, c_m);
  if (!angles)
    return AlignmentVerdict::Undecidable;
  return detail::below_threshold(*angles, config.angle_threshold_deg) ? AlignmentVerdict::Aligned
                                                                      : AlignmentVerdict::NotAligned;
}

/**
 * Alignment test tolerant of range underestimation.
 *
 * M must be closer to each reference than the references are to each other.
 * Under that guard, a side sum not exceeding B-C means M lies between B and
 * C. Otherwise the triangle exists and the angle test decides.
 */
inline AlignmentVerdict alignment_revised(double b_c, double b_m, double c_m, const AlignmentConfig& config = {})
{
  detail::require_positive(b_c, b_m, c_m, "alignment_revised");
  if (!(b_m < b_c && c_m < b_c))
    return AlignmentVerdict::NotAligned;
  if (b_m + c_m <= b_c * (1.0 + kCosineTolerance))
    return AlignmentVerdict::Aligned;
  // Guard plus b_m + c_m > b_c imply all three triangle inequalities hold.
  const TriangleAngles angles{detail::degrees(std::acos(std::clamp(detail::cosine_at(b_c, b_m, c_m), -1.0, 1.0))),
                              detail::degrees(std::acos(std::clamp(detail::cosine_at(b_c, c_m, b_m), -1.0, 1.0)))};
  return detail::below_threshold(angles, config.angle_threshold_deg) ? AlignmentVerdict::Aligned
                                                                     : AlignmentVerdict::NotAligned;
}

inline AlignmentVerdict judge_alignment(double b_c, double b_m, double c_m, const AlignmentConfig& config)
{
  return config.variant == AlignmentVariant::Original ? alignment_original(b_c, b_m, c_m, config)
                                                      : alignment_revised(b_c, b_m, c_m, config);
}

/// Two reference objects and the target's distance to each.
struct AlignmentPair
{
  ObjectId ref_a;
  ObjectId ref_b;
  double target_to_a = 0.0;
  double target_to_b = 0.0;
  std::optional<double> measured_a_to_b;  ///< used only when the SOD lacks a position for either reference
};

/// One "between" fragment per pair judged aligned, in input order.
inline std::vector<SpdFragment> alignment_estimator(const ObjectId& target, std::span<const AlignmentPair> pairs,
                                                    const SodDatabase& sod, const AlignmentConfig& config = {},
                                                    const PhraseTemplates& phrases = {})
{
  config.validate();
  if (!sod.contains(target))
    throw ValidationError("alignment_estimator: unknown target '" + target + "'");
  std::vector<SpdFragment> out;
  for (const auto& p : pairs)
  {
    const auto& a = sod.at(p.ref_a);
    const auto& b = sod.at(p.ref_b);
    std::optional<double> a_to_b = sod.known_distance(p.ref_a, p.ref_b);
    if (!a_to_b)
      a_to_b = p.measured_a_to_b;
    if (!a_to_b)
      throw ValidationError("alignment_estimator: no position or measured distance for pair '" + p.ref_a + "', '" +
                            p.ref_b + "'");
    if (judge_alignment(*a_to_b, p.target_to_a, p.target_to_b, config) != AlignmentVerdict::Aligned)
      continue;
    SpdFragment f;
    f.kind = FragmentKind::Alignment;
    f.subject = target;
    f.references = {p.ref_a, p.ref_b};
    f.text = substitute(substitute(phrases.between, "<labelA>", a.label), "<labelB>", b.label);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace semloc

#endif  // SEMLOC_ALIGNMENT_HPP_
