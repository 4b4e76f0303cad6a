#ifndef SEMLOC_PHRASES_HPP_
#define SEMLOC_PHRASES_HPP_

#include <string>
#include <string_view>

#include "semloc/types.hpp"

namespace semloc
{
/// English phrase templates for each fragment kind. Placeholders are substituted verbatim.
struct PhraseTemplates
{
  std::string room = "in the <room>";
  std::string very_close = "very close to the <label>";
  std::string near = "near the <label>";
  std::string in_vicinity = "in the vicinity of the <label>";
  std::string between = "between the <labelA> and the <labelB>";

  const std::string& for_class(ProximityClass c) const
  {
    switch (c)
    {
      case ProximityClass::VeryClose:
        return very_close;
      case ProximityClass::Near:
        return near;
      case ProximityClass::InVicinity:
        return in_vicinity;
    }
    return near;
  }
};

inline std::string substitute(std::string text, std::string_view placeholder, std::string_view value)
{
  for (auto pos = text.find(placeholder); pos != std::string::npos;
       pos = text.find(placeholder, pos + value.size()))
    text.replace(pos, placeholder.size(), value);
  return text;
}

}  // namespace semloc

#endif  // SEMLOC_PHRASES_HPP_
