#ifndef SEMLOC_ROOM_HPP_
#define SEMLOC_ROOM_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "semloc/phrases.hpp"
#include "semloc/proximity.hpp"
#include "semloc/sod.hpp"
#include "semloc/types.hpp"

namespace semloc
{
struct RoomVoteConfig
{
  int k = 3;  ///< number of closest neighbours that vote
  double max_neighbour_range = 5.0;  ///< neighbours further than this are out of radio range

  void validate() const
  {
    if (k < 1)
      throw ValidationError("room vote: k must be >= 1");
    if (!(max_neighbour_range > 0.0))
      throw ValidationError("room vote: max neighbour range must be > 0");
  }
};

/**
 * Room Determination by majority vote of the k closest neighbours in range.
 *
 * Ties on vote count go to the room whose voters have the smallest summed
 * distance, then to the lexicographically smallest room id.
 */
inline std::optional<SpdFragment> room_determination(const ObjectId& target, std::span<const ReferenceDistance> neighbours,
                                                     const SodDatabase& sod, const RoomVoteConfig& config = {},
                                                     const PhraseTemplates& phrases = {})
{
  config.validate();
  std::vector<ReferenceDistance> eligible;
  for (const auto& n : neighbours)
  {
    if (!(n.distance >= 0.0))
      throw ValidationError("room_determination: negative distance to '" + n.reference + "'");
    if (!sod.contains(n.reference))
      throw ValidationError("room_determination: neighbour '" + n.reference + "' is not in the SOD");
    if (n.distance <= config.max_neighbour_range)
      eligible.push_back(n);
  }
  if (eligible.empty())
    return std::nullopt;

  std::stable_sort(eligible.begin(), eligible.end(),
                   [](const auto& x, const auto& y) { return x.distance < y.distance; });
  if (eligible.size() > static_cast<std::size_t>(config.k))
    eligible.resize(static_cast<std::size_t>(config.k));

  struct Tally
  {
    int votes = 0;
    double distance_sum = 0.0;
  };
  std::map<std::string, Tally> tally;
  for (const auto& n : eligible)
  {
    auto& t = tally[sod.at(n.reference).room];
    ++t.votes;
    t.distance_sum += n.distance;
  }

  // std::map iterates rooms in lexicographic order, so the strict comparison keeps the smallest id on full ties.
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it)
  {
    const auto& [votes, sum] = it->second;
    if (votes > best->second.votes || (votes == best->second.votes && sum < best->second.distance_sum))
      best = it;
  }

  SpdFragment f;
  f.kind = FragmentKind::Room;
  f.subject = target;
  f.references = {best->first};
  f.text = substitute(phrases.room, "<room>", best->first);
  return f;
}

}  // namespace semloc

#endif  // SEMLOC_ROOM_HPP_
