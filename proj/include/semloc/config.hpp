#ifndef SEMLOC_CONFIG_HPP_
#define SEMLOC_CONFIG_HPP_

#include <filesystem>
#include <string>

#include <json.hpp>

#include "semloc/alignment.hpp"
#include "semloc/phrases.hpp"
#include "semloc/proximity.hpp"
#include "semloc/ranging_sim.hpp"
#include "semloc/room.hpp"
#include "semloc/sod.hpp"

namespace semloc
{
/// Everything that tunes how distances become a position description.
struct EngineConfig
{
  ProximityThresholds thresholds;
  AlignmentConfig alignment;
  RoomVoteConfig room_vote;
  PhraseTemplates phrases;
  bool nearest_only = true;
  bool room_enabled = true;
  bool proximity_enabled = true;
  bool alignment_enabled = true;
  /// Semantics proximity thresholds are applied in; inter-centre ranges are converted with bounding radii.
  DistanceSemantics proximity_semantics = DistanceSemantics::EdgeToEdge;
  bool capitalize_first = false;
  double staleness_s = 60.0;
  double debounce_s = 0.2;
  double max_plausible_m = kDefaultMaxPlausible;

  void validate() const
  {
    thresholds.validate();
    alignment.validate();
    room_vote.validate();
    if (!(staleness_s > 0.0))
      throw ValidationError("config: staleness must be > 0");
    if (!(debounce_s >= 0.0))
      throw ValidationError("config: debounce must be >= 0");
    if (!(max_plausible_m > 0.0))
      throw ValidationError("config: max plausible distance must be > 0");
  }
};

inline nlohmann::json to_json(const EngineConfig& c)
{
  return {
      {"proximity",
       {{"very_close_max_m", c.thresholds.very_close_max},
        {"near_max_m", c.thresholds.near_max},
        {"vicinity_max_m", c.thresholds.vicinity_max},
        {"nearest_only", c.nearest_only},
        {"semantics", std::string(to_string(c.proximity_semantics))},
        {"enabled", c.proximity_enabled}}},
      {"alignment",
       {{"angle_threshold_deg", c.alignment.angle_threshold_deg},
        {"variant", c.alignment.variant == AlignmentVariant::Original ? "original" : "revised"},
        {"enabled", c.alignment_enabled}}},
      {"room_vote",
       {{"k", c.room_vote.k}, {"max_neighbour_range_m", c.room_vote.max_neighbour_range}, {"enabled", c.room_enabled}}},
      {"phrases",
       {{"room", c.phrases.room},
        {"very_close", c.phrases.very_close},
        {"near", c.phrases.near},
        {"in_vicinity", c.phrases.in_vicinity},
        {"between", c.phrases.between},
        {"capitalize_first", c.capitalize_first}}},
      {"engine", {{"staleness_s", c.staleness_s}, {"debounce_s", c.debounce_s}, {"max_plausible_m", c.max_plausible_m}}},
  };
}

/// Overlays the keys present in j onto base; absent keys keep their current value.
inline EngineConfig load_config(const nlohmann::json& j, EngineConfig c = {})
{
  try
  {
    if (auto it = j.find("proximity"); it != j.end())
    {
      const auto& p = *it;
      c.thresholds.very_close_max = p.value("very_close_max_m", c.thresholds.very_close_max);
      c.thresholds.near_max = p.value("near_max_m", c.thresholds.near_max);
      c.thresholds.vicinity_max = p.value("vicinity_max_m", c.thresholds.vicinity_max);
      c.nearest_only = p.value("nearest_only", c.nearest_only);
      c.proximity_enabled = p.value("enabled", c.proximity_enabled);
      if (p.contains("semantics"))
        c.proximity_semantics = parse_semantics(p.at("semantics").get<std::string>());
    }
    if (auto it = j.find("alignment"); it != j.end())
    {
      const auto& a = *it;
      c.alignment.angle_threshold_deg = a.value("angle_threshold_deg", c.alignment.angle_threshold_deg);
      c.alignment_enabled = a.value("enabled", c.alignment_enabled);
      if (a.contains("variant"))
      {
        const auto v = a.at("variant").get<std::string>();
        if (v == "original")
          c.alignment.variant = AlignmentVariant::Original;
        else if (v == "revised")
          c.alignment.variant = AlignmentVariant::Revised;
        else
          throw ValidationError("config: unknown alignment variant '" + v + "'");
      }
    }
    if (auto it = j.find("room_vote"); it != j.end())
    {
      c.room_vote.k = it->value("k", c.room_vote.k);
      c.room_vote.max_neighbour_range = it->value("max_neighbour_range_m", c.room_vote.max_neighbour_range);
      c.room_enabled = it->value("enabled", c.room_enabled);
    }
    if (auto it = j.find("phrases"); it != j.end())
    {
      c.phrases.room = it->value("room", c.phrases.room);
      c.phrases.very_close = it->value("very_close", c.phrases.very_close);
      c.phrases.near = it->value("near", c.phrases.near);
      c.phrases.in_vicinity = it->value("in_vicinity", c.phrases.in_vicinity);
      c.phrases.between = it->value("between", c.phrases.between);
      c.capitalize_first = it->value("capitalize_first", c.capitalize_first);
    }
    if (auto it = j.find("engine"); it != j.end())
    {
      c.staleness_s = it->value("staleness_s", c.staleness_s);
      c.debounce_s = it->value("debounce_s", c.debounce_s);
      c.max_plausible_m = it->value("max_plausible_m", c.max_plausible_m);
    }
  }
  catch (const nlohmann::json::exception& e)
  {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline EngineConfig load_config_file(const std::filesystem::path& path)
{
  return load_config(detail::read_json_file(path));
}

}  // namespace semloc

#endif  // SEMLOC_CONFIG_HPP_
