#ifndef SEMLOC_TYPES_HPP_
#define SEMLOC_TYPES_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semloc
{
/// Identifier of a connected object, unique within one object database.
using ObjectId = std::string;

/// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Vec3
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

enum class Role
{
  FixedReference,
  Mobile
};

/// How a distance between two objects was measured.
enum class DistanceSemantics
{
  InterCentre,
  EdgeToEdge
};

inline std::string_view to_string(DistanceSemantics s)
{
  return s == DistanceSemantics::InterCentre ? "inter-centre" : "edge-to-edge";
}

inline DistanceSemantics parse_semantics(std::string_view s)
{
  if (s == "inter-centre" || s == "centre" || s == "center" || s == "inter-center")
    return DistanceSemantics::InterCentre;
  if (s == "edge-to-edge" || s == "edge")
    return DistanceSemantics::EdgeToEdge;
  throw ValidationError("unknown distance semantics '" + std::string(s) + "'");
}

/// Semantic description of one connected object.
struct ObjectDescriptor
{
  ObjectId id;
  std::string label;
  std::string room;
  Role role = Role::Mobile;
  std::optional<Vec3> centre;  ///< metres, local allo-centred frame
  double bounding_radius = 0.0;  ///< half-extent used for edge-to-edge conversion

  bool is_fixed() const { return role == Role::FixedReference; }
};

/// One raw ranging measurement between two objects.
struct RangingSample
{
  ObjectId a;
  ObjectId b;
  double distance = 0.0;  ///< metres
  double timestamp = 0.0;  ///< seconds, monotonic
};

/// Aggregated distance between two objects.
struct RangingEstimate
{
  ObjectId a;
  ObjectId b;
  double distance = 0.0;
  std::size_t sample_count = 1;
  DistanceSemantics semantics = DistanceSemantics::InterCentre;
};

/// Qualitative distance relation. The absence of a relation is an empty optional.
enum class ProximityClass
{
  VeryClose,
  Near,
  InVicinity
};

/// Closeness rank: larger means closer.
constexpr int closeness(std::optional<ProximityClass> c)
{
  if (!c)
    return 0;
  switch (*c)
  {
    case ProximityClass::VeryClose:
      return 3;
    case ProximityClass::Near:
      return 2;
    case ProximityClass::InVicinity:
      return 1;
  }
  return 0;
}

/// Short codes used in the study tables: VC, N, V and NR for no relation.
inline std::string_view class_code(std::optional<ProximityClass> c)
{
  if (!c)
    return "NR";
  switch (*c)
  {
    case ProximityClass::VeryClose:
      return "VC";
    case ProximityClass::Near:
      return "N";
    case ProximityClass::InVicinity:
      return "V";
  }
  return "NR";
}

inline std::optional<ProximityClass> parse_class_code(std::string_view code)
{
  if (code == "VC")
    return ProximityClass::VeryClose;
  if (code == "N")
    return ProximityClass::Near;
  if (code == "V")
    return ProximityClass::InVicinity;
  if (code == "NR")
    return std::nullopt;
  throw ValidationError("unknown proximity code '" + std::string(code) + "'");
}

enum class FragmentKind
{
  Room,
  Proximity,
  Alignment
};

/// One algorithm's assertion about the position of an object.
struct SpdFragment
{
  FragmentKind kind = FragmentKind::Room;
  ObjectId subject;
  std::vector<ObjectId> references;  ///< room id for Room, 1 object for Proximity, 2 for Alignment
  std::optional<ProximityClass> detail;  ///< set for Proximity only
  double distance = 0.0;  ///< distance that produced a Proximity fragment, used for ordering
  std::string text;
};

/// Combined, ordered position description of one object.
struct Spd
{
  ObjectId subject;
  std::vector<SpdFragment> fragments;
  std::string rendered;

  bool empty() const { return fragments.empty(); }
};

inline constexpr std::string_view kFragmentSeparator = ", ";

}  // namespace semloc

#endif  // SEMLOC_TYPES_HPP_
