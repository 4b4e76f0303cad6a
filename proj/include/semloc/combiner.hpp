#ifndef SEMLOC_COMBINER_HPP_
#define SEMLOC_COMBINER_HPP_

#include <algorithm>
#include <cctype>
#include <span>
#include <string>
#include <vector>

#include "semloc/types.hpp"

namespace semloc
{
/**
 * SPD Combiner: room fragments first, then proximity by ascending distance,
 * then alignment in input order, joined by ", ".
 *
 * With capitalize_first the first letter of the rendered string is upper-cased.
 */
inline Spd combine(std::span<const SpdFragment> fragments, const ObjectId& subject = {}, bool capitalize_first = false)
{
  Spd spd;
  spd.subject = subject;
  for (const auto& f : fragments)
  {
    if (spd.subject.empty())
      spd.subject = f.subject;
    else if (f.subject != spd.subject)
      throw ValidationError("combine: fragments about '" + spd.subject + "' and '" + f.subject + "'");
    if (f.text.empty())
      throw ValidationError("combine: empty fragment text");
    if (f.text.find(kFragmentSeparator) != std::string::npos)
      throw ValidationError("combine: fragment text contains the separator: '" + f.text + "'");
  }

  auto rank = [](FragmentKind k) { return static_cast<int>(k); };
  spd.fragments.assign(fragments.begin(), fragments.end());
  std::stable_sort(spd.fragments.begin(), spd.fragments.end(), [&](const SpdFragment& x, const SpdFragment& y) {
    if (x.kind != y.kind)
      return rank(x.kind) < rank(y.kind);
    if (x.kind == FragmentKind::Proximity)
      return x.distance < y.distance;
    return false;
  });

  for (std::size_t i = 0; i < spd.fragments.size(); ++i)
  {
    if (i > 0)
      spd.rendered += kFragmentSeparator;
    spd.rendered += spd.fragments[i].text;
  }
  if (capitalize_first && !spd.rendered.empty())
    spd.rendered[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(spd.rendered[0])));
  return spd;
}

}  // namespace semloc

#endif  // SEMLOC_COMBINER_HPP_
