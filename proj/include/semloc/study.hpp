#ifndef SEMLOC_STUDY_HPP_
#define SEMLOC_STUDY_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semloc/proximity.hpp"
#include "semloc/sod.hpp"
#include "semloc/types.hpp"

namespace semloc::study
{
using Answer = std::optional<ProximityClass>;

struct Situation
{
  int id = 0;
  std::string room;
  ObjectId target;
  std::vector<ObjectId> references;  ///< table column order
};

/// Symmetric pairwise distances between the objects of one room, in centimetres.
struct DistanceMatrix
{
  std::string room;
  DistanceSemantics semantics = DistanceSemantics::EdgeToEdge;
  std::vector<ObjectId> objects;
  std::vector<std::vector<std::optional<double>>> cm;

  std::optional<std::size_t> index(const ObjectId& id) const
  {
    auto it = std::find(objects.begin(), objects.end(), id);
    if (it == objects.end())
      return std::nullopt;
    return static_cast<std::size_t>(it - objects.begin());
  }

  std::optional<double> metres(const ObjectId& a, const ObjectId& b) const
  {
    const auto i = index(a);
    const auto j = index(b);
    if (!i || !j || !cm[*i][*j])
      return std::nullopt;
    return *cm[*i][*j] / 100.0;
  }
};

/// Algorithm output for one situation: a class per reference plus the reference kept by nearest-only selection.
struct AlgoRow
{
  std::vector<std::pair<ObjectId, Answer>> classes;
  std::optional<ObjectId> nearest;  ///< unknown for transcribed rows whose nearest reference is not published

  Answer at(const ObjectId& ref) const
  {
    for (const auto& [r, c] : classes)
      if (r == ref)
        return c;
    throw ValidationError("algo row has no reference '" + ref + "'");
  }

  /// Class reported under nearest-only selection: the nearest reference's class, or nothing.
  Answer nearest_class() const { return nearest ? at(*nearest) : std::nullopt; }
};

/// One participant's answers for one situation; references they did not describe hold nothing (NR).
using ParticipantResponses = std::map<ObjectId, Answer>;

struct StudyDataset
{
  int participants = 10;
  std::vector<Situation> situations;
  std::vector<DistanceMatrix> matrices;
  std::map<int, std::map<DistanceSemantics, AlgoRow>> transcribed_rows;
  std::map<int, std::vector<ParticipantResponses>> responses;  ///< empty vector: no responses shipped

  const Situation& situation(int id) const
  {
    for (const auto& s : situations)
      if (s.id == id)
        return s;
    throw ValidationError("no situation " + std::to_string(id));
  }

  const DistanceMatrix* matrix_for(const Situation& s, DistanceSemantics sem) const
  {
    for (const auto& m : matrices)
    {
      if (m.room != s.room || m.semantics != sem || !m.index(s.target))
        continue;
      if (std::all_of(s.references.begin(), s.references.end(), [&](const auto& r) { return m.index(r).has_value(); }))
        return &m;
    }
    return nullptr;
  }

  std::size_t response_count() const
  {
    std::size_t n = 0;
    for (const auto& [id, rs] : responses)
      n += rs.size();
    return n;
  }
};

// ---------------------------------------------------------------------------
// Ingestion

inline DistanceMatrix load_distance_matrix(const nlohmann::json& j)
try
{
  DistanceMatrix m;
  m.room = j.at("room").get<std::string>();
  m.semantics = parse_semantics(j.at("semantics").get<std::string>());
  const auto unit = j.value("unit", std::string("cm"));
  const double scale = unit == "cm" ? 1.0 : unit == "m" ? 100.0 : throw ValidationError("unknown unit '" + unit + "'");
  m.objects = j.at("objects").get<std::vector<std::string>>();
  const auto n = m.objects.size();
  m.cm.assign(n, std::vector<std::optional<double>>(n));
  const auto& rows = j.at("matrix");
  if (rows.size() != n)
    throw ValidationError(m.room + " matrix: expected " + std::to_string(n) + " rows");
  for (std::size_t i = 0; i < n; ++i)
  {
    if (rows[i].size() != n)
      throw ValidationError(m.room + " matrix: row '" + m.objects[i] + "' has the wrong length");
    for (std::size_t k = 0; k < n; ++k)
    {
      const auto& v = rows[i][k];
      if (i == k)
      {
        if (!v.is_null())
          throw ValidationError(m.room + " matrix: diagonal entry for '" + m.objects[i] + "' must be empty");
        continue;
      }
      if (v.is_null())
        continue;
      const double d = v.get<double>() * scale;
      if (!(d >= 0.0))
        throw ValidationError(m.room + " matrix: negative distance");
      m.cm[i][k] = d;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      if (m.cm[i][k] != m.cm[k][i])
        throw ValidationError(m.room + " matrix is not symmetric at (" + m.objects[i] + ", " + m.objects[k] + ")");
  return m;
}
catch (const nlohmann::json::exception& e)
{
  throw ValidationError("distance matrix: " + std::string(e.what()));
}

/**
 * Rebuilds per-participant answers from per-reference percentages.
 *
 * For each reference, participants are filled in index order with VC, then N,
 * then V, then NR, according to the counts. Every metric computed here
 * depends only on the per-reference counts, so the assignment is arbitrary.
 */
inline std::vector<ParticipantResponses> reconstruct_responses(const nlohmann::json& percentages, const Situation& s,
                                                                int participants)
{
  std::vector<ParticipantResponses> out;
  if (percentages.empty())
    return out;
  for (auto it = percentages.begin(); it != percentages.end(); ++it)
    if (std::find(s.references.begin(), s.references.end(), it.key()) == s.references.end())
      throw ValidationError("situation " + std::to_string(s.id) + ": responses name undeclared reference '" + it.key() +
                            "'");
  out.assign(static_cast<std::size_t>(participants), {});
  static constexpr const char* kOrder[] = {"VC", "N", "V", "NR"};
  for (const auto& ref : s.references)
  {
    if (!percentages.contains(ref))
      throw ValidationError("situation " + std::to_string(s.id) + ": no responses for reference '" + ref + "'");
    const auto& cell = percentages.at(ref);
    int next = 0;
    for (const char* code : kOrder)
    {
      const double pct = cell.value(code, 0.0);
      const double exact = pct * participants / 100.0;
      const auto count = static_cast<int>(std::lround(exact));
      if (pct < 0.0 || std::abs(exact - count) > 1e-9)
        throw ValidationError("situation " + std::to_string(s.id) + ", '" + ref + "', " + code + ": " +
                              std::to_string(pct) + "% is not a whole number of " + std::to_string(participants) +
                              " participants");
      for (int c = 0; c < count; ++c, ++next)
      {
        if (next >= participants)
          break;
        out[static_cast<std::size_t>(next)][ref] = parse_class_code(code);
      }
    }
    if (next != participants)
      throw ValidationError("situation " + std::to_string(s.id) + ", '" + ref + "': percentages do not sum to 100");
  }
  return out;
}

inline AlgoRow load_transcribed_row(const nlohmann::json& j, const Situation& s)
{
  AlgoRow row;
  const auto& classes = j.at("classes");
  for (const auto& ref : s.references)
  {
    if (!classes.contains(ref))
      throw ValidationError("situation " + std::to_string(s.id) + ": transcribed row lacks '" + ref + "'");
    row.classes.emplace_back(ref, parse_class_code(classes.at(ref).get<std::string>()));
  }
  if (classes.size() != s.references.size())
    throw ValidationError("situation " + std::to_string(s.id) + ": transcribed row names undeclared references");
  if (j.contains("nearest") && !j.at("nearest").is_null())
  {
    row.nearest = j.at("nearest").get<std::string>();
    if (std::find(s.references.begin(), s.references.end(), *row.nearest) == s.references.end())
      throw ValidationError("situation " + std::to_string(s.id) + ": nearest reference is undeclared");
  }
  return row;
}

/**
 * Loads a study manifest: participants, situations, and the lists of
 * distance, response and transcribed-row files (paths relative to the manifest).
 */
inline StudyDataset ingest_study(const std::filesystem::path& manifest_path)
{
  const auto manifest = detail::read_json_file(manifest_path);
  const auto base = manifest_path.parent_path();
  StudyDataset ds;
  try
  {
    ds.participants = manifest.value("participants", 10);
    if (ds.participants < 1)
      throw ValidationError("study: participants must be >= 1");
    for (const auto& js : manifest.at("situations"))
    {
      Situation s;
      s.id = js.at("id").get<int>();
      s.room = js.at("room").get<std::string>();
      s.target = js.at("target").get<std::string>();
      s.references = js.at("references").get<std::vector<std::string>>();
      ds.situations.push_back(std::move(s));
    }
    for (const auto& f : manifest.value("distances", nlohmann::json::array()))
      ds.matrices.push_back(load_distance_matrix(detail::read_json_file(base / f.get<std::string>())));
    for (const auto& f : manifest.value("algo_rows", nlohmann::json::array()))
    {
      const auto j = detail::read_json_file(base / f.get<std::string>());
      const auto& s = ds.situation(j.at("situation").get<int>());
      for (auto it = j.at("rows").begin(); it != j.at("rows").end(); ++it)
        ds.transcribed_rows[s.id][parse_semantics(it.key())] = load_transcribed_row(it.value(), s);
    }
    for (const auto& f : manifest.value("responses", nlohmann::json::array()))
    {
      const auto j = detail::read_json_file(base / f.get<std::string>());
      const auto& s = ds.situation(j.at("situation").get<int>());
      ds.responses[s.id] = reconstruct_responses(j.value("percentages", nlohmann::json::object()), s, ds.participants);
    }
  }
  catch (const nlohmann::json::exception& e)
  {
    throw ValidationError("study: " + std::string(e.what()));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Metrics

/// Proximity classes of the target against each reference; computed from a matrix when one exists.
inline AlgoRow algo_row(const StudyDataset& ds, int situation_id, DistanceSemantics sem,
                        const ProximityThresholds& thresholds = {})
{
  const auto& s = ds.situation(situation_id);
  if (const auto* m = ds.matrix_for(s, sem))
  {
    AlgoRow row;
    double best = 0.0;
    for (const auto& ref : s.references)
    {
      const auto d = m->metres(s.target, ref);
      if (!d)
        throw ValidationError("situation " + std::to_string(s.id) + ": no distance between '" + s.target + "' and '" +
                              ref + "'");
      row.classes.emplace_back(ref, classify_proximity(*d, thresholds));
      if (!row.nearest || *d < best)
      {
        row.nearest = ref;
        best = *d;
      }
    }
    return row;
  }
  auto sit = ds.transcribed_rows.find(s.id);
  if (sit != ds.transcribed_rows.end())
    if (auto rit = sit->second.find(sem); rit != sit->second.end())
      return rit->second;
  throw ValidationError("situation " + std::to_string(s.id) + ": no " + std::string(to_string(sem)) + " distances");
}

struct AgreementOptions
{
  bool include_nr = false;
  bool nearest_only = false;
  DistanceSemantics semantics = DistanceSemantics::EdgeToEdge;
  std::vector<int> situations;  ///< empty: every situation
};

struct Agreement
{
  std::size_t matches = 0;
  std::size_t comparisons = 0;

  double rate() const { return comparisons == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(comparisons); }
};

/**
 * How often participants said what the algorithm says.
 *
 * Without include_nr, only expressed answers (VC, N, V) are compared; with
 * it, a participant's NR matches an algorithm with no relation. With
 * nearest_only, each participant is compared only on the reference the
 * algorithm kept.
 */
inline Agreement agreement_rate(const StudyDataset& ds, const AgreementOptions& options,
                                const ProximityThresholds& thresholds = {})
{
  std::vector<int> ids = options.situations;
  if (ids.empty())
    for (const auto& s : ds.situations)
      ids.push_back(s.id);

  Agreement result;
  for (int id : ids)
  {
    const auto& s = ds.situation(id);
    const auto row = algo_row(ds, id, options.semantics, thresholds);
    auto rit = ds.responses.find(id);
    if (rit == ds.responses.end())
      continue;
    for (const auto& participant : rit->second)
    {
      auto compare = [&](const Answer& algo, const Answer& said) {
        if (!said && !options.include_nr)
          return;
        ++result.comparisons;
        if (algo == said)
          ++result.matches;
      };
      if (options.nearest_only)
      {
        if (row.nearest)
          compare(row.nearest_class(), participant.at(*row.nearest));
        else
        {
          // No reference kept: the algorithm is silent and agrees only with a participant who said nothing at all.
          const bool silent =
              std::none_of(participant.begin(), participant.end(), [](const auto& kv) { return kv.second.has_value(); });
          if (!silent)
            ++result.comparisons;
          else if (options.include_nr)
          {
            ++result.comparisons;
            ++result.matches;
          }
        }
        continue;
      }
      for (const auto& ref : s.references)
        compare(row.at(ref), participant.at(ref));
    }
  }
  if (result.comparisons == 0)
    throw ValidationError("agreement: no responses in scope");
  return result;
}

}  // namespace semloc::study

#endif  // SEMLOC_STUDY_HPP_
