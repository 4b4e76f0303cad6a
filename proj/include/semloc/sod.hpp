#ifndef SEMLOC_SOD_HPP_
#define SEMLOC_SOD_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "semloc/types.hpp"

namespace semloc
{
/// Converts an inter-centre distance to an edge-to-edge one, treating each object as a sphere.
inline double edge_to_edge(double inter_centre, double radius_a, double radius_b)
{
  if (!(inter_centre >= 0.0) || !(radius_a >= 0.0) || !(radius_b >= 0.0))
    throw ValidationError("edge_to_edge: distances and radii must be non-negative");
  return std::max(0.0, inter_centre - radius_a - radius_b);
}

/// Inverse of edge_to_edge for unclamped distances.
inline double inter_centre(double edge, double radius_a, double radius_b)
{
  if (!(edge >= 0.0) || !(radius_a >= 0.0) || !(radius_b >= 0.0))
    throw ValidationError("inter_centre: distances and radii must be non-negative");
  return edge + radius_a + radius_b;
}

/**
 * Semantic Object Description database.
 *
 * Immutable once built; lookups are by object id and iteration follows
 * document order so that everything derived from it is deterministic.
 */
class SodDatabase
{
public:
  SodDatabase() = default;

  explicit SodDatabase(std::vector<ObjectDescriptor> objects) : objects_(std::move(objects))
  {
    for (std::size_t i = 0; i < objects_.size(); ++i)
    {
      const auto& o = objects_[i];
      if (o.id.empty())
        throw ValidationError("object at index " + std::to_string(i) + " has an empty id");
      if (!index_.emplace(o.id, i).second)
        throw ValidationError("duplicate object id '" + o.id + "'");
      if (o.room.empty())
        throw ValidationError("object '" + o.id + "' has no room");
      if (!(o.bounding_radius >= 0.0) || !std::isfinite(o.bounding_radius))
        throw ValidationError("object '" + o.id + "' has a negative bounding radius");
      if (o.label.empty())
        throw ValidationError("object '" + o.id + "' has an empty label");
    }
  }

  std::size_t size() const { return objects_.size(); }
  bool contains(const ObjectId& id) const { return index_.count(id) != 0; }

  const ObjectDescriptor* find(const ObjectId& id) const
  {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &objects_[it->second];
  }

  const ObjectDescriptor& at(const ObjectId& id) const
  {
    if (const auto* o = find(id))
      return *o;
    throw ValidationError("unknown object id '" + id + "'");
  }

  const std::vector<ObjectDescriptor>& objects() const { return objects_; }

  /// Inter-centre distance from stored positions, when both objects have one.
  std::optional<double> known_distance(const ObjectId& a, const ObjectId& b) const
  {
    const auto& oa = at(a);
    const auto& ob = at(b);
    if (!oa.centre || !ob.centre)
      return std::nullopt;
    return distance(*oa.centre, *ob.centre);
  }

private:
  std::vector<ObjectDescriptor> objects_;
  std::map<ObjectId, std::size_t> index_;
};

namespace detail
{
inline Role parse_role(const std::string& s, const std::string& id)
{
  if (s == "fixed" || s == "fixed-reference" || s == "reference")
    return Role::FixedReference;
  if (s == "mobile")
    return Role::Mobile;
  throw ValidationError("object '" + id + "' has unknown role '" + s + "'");
}

inline Vec3 parse_vec3(const nlohmann::json& j, const std::string& what)
{
  if (j.is_array() && j.size() == 3)
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (j.is_object())
    return {j.value("x", 0.0), j.value("y", 0.0), j.value("z", 0.0)};
  throw ValidationError(what + ": expected [x, y, z]");
}

inline nlohmann::json read_json_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open '" + path.string() + "'");
  try
  {
    return nlohmann::json::parse(in);
  }
  catch (const nlohmann::json::parse_error& e)
  {
    throw ValidationError(path.string() + ": " + e.what());
  }
}
}  // namespace detail

/// Builds a database from a parsed document: either a top-level array or {"objects": [...]}.
inline SodDatabase load_sod(const nlohmann::json& doc)
{
  const nlohmann::json& list = doc.is_object() && doc.contains("objects") ? doc.at("objects") : doc;
  if (!list.is_array())
    throw ValidationError("SOD document must hold a list of objects");

  std::vector<ObjectDescriptor> objects;
  objects.reserve(list.size());
  for (const auto& j : list)
  {
    ObjectDescriptor o;
    try
    {
      o.id = j.at("id").get<std::string>();
      o.label = j.value("label", o.id);
      if (!j.contains("room"))
        throw ValidationError("object '" + o.id + "' has no room");
      o.room = j.at("room").get<std::string>();
      o.role = detail::parse_role(j.value("role", std::string("mobile")), o.id);
      if (j.contains("centre") && !j.at("centre").is_null())
        o.centre = detail::parse_vec3(j.at("centre"), "object '" + o.id + "' centre");
      if (j.contains("boundingRadius"))
        o.bounding_radius = j.at("boundingRadius").get<double>();
      else if (j.contains("radius"))
        o.bounding_radius = j.at("radius").get<double>();
    }
    catch (const nlohmann::json::exception& e)
    {
      throw ValidationError("object '" + o.id + "': " + e.what());
    }
    if (o.bounding_radius < 0.0)
      throw ValidationError("object '" + o.id + "' has a negative bounding radius");
    objects.push_back(std::move(o));
  }
  return SodDatabase(std::move(objects));
}

inline SodDatabase load_sod_file(const std::filesystem::path& path) { return load_sod(detail::read_json_file(path)); }

}  // namespace semloc

#endif  // SEMLOC_SOD_HPP_
