#include <gtest/gtest.h>

#include "semloc/combiner.hpp"
#include "semloc/sod.hpp"

using namespace semloc;

TEST(EdgeToEdge, ZeroRadiiIsIdentity) { EXPECT_DOUBLE_EQ(edge_to_edge(1.36, 0, 0), 1.36); }

TEST(EdgeToEdge, SubtractsBothRadii) { EXPECT_NEAR(edge_to_edge(1.0, 0.2, 0.3), 0.5, 1e-12); }

TEST(EdgeToEdge, OverlapClampsToZero) { EXPECT_EQ(edge_to_edge(0.3, 0.2, 0.2), 0.0); }

TEST(EdgeToEdge, RejectsNegativeInputs)
{
  EXPECT_THROW(edge_to_edge(-0.1, 0, 0), ValidationError);
  EXPECT_THROW(edge_to_edge(1.0, -0.1, 0), ValidationError);
  EXPECT_THROW(edge_to_edge(1.0, 0, -0.1), ValidationError);
}

TEST(LoadSod, SingleObject)
{
  const auto doc = nlohmann::json::parse(R"([{"id":"tv","room":"livingroom","role":"fixed","radius":0.5}])");
  const auto db = load_sod(doc);
  ASSERT_EQ(db.size(), 1u);
  const auto& tv = db.at("tv");
  EXPECT_EQ(tv.label, "tv");
  EXPECT_EQ(tv.room, "livingroom");
  EXPECT_TRUE(tv.is_fixed());
  EXPECT_DOUBLE_EQ(tv.bounding_radius, 0.5);
  EXPECT_FALSE(tv.centre.has_value());
}

TEST(LoadSod, DuplicateIdNamesTheId)
{
  const auto doc = nlohmann::json::parse(
      R"({"objects":[{"id":"tv","room":"livingroom"},{"id":"tv","room":"kitchen"}]})");
  try
  {
    load_sod(doc);
    FAIL() << "expected a duplicate-id error";
  }
  catch (const ValidationError& e)
  {
    EXPECT_NE(std::string(e.what()).find("'tv'"), std::string::npos) << e.what();
  }
}

TEST(LoadSod, MissingRoomNamesTheId)
{
  const auto doc = nlohmann::json::parse(R"([{"id":"lamp","role":"fixed"}])");
  try
  {
    load_sod(doc);
    FAIL();
  }
  catch (const ValidationError& e)
  {
    EXPECT_NE(std::string(e.what()).find("'lamp'"), std::string::npos) << e.what();
  }
}

TEST(LoadSod, NegativeRadiusNamesTheId)
{
  const auto doc = nlohmann::json::parse(R"([{"id":"bowl","room":"kitchen","boundingRadius":-0.1}])");
  try
  {
    load_sod(doc);
    FAIL();
  }
  catch (const ValidationError& e)
  {
    EXPECT_NE(std::string(e.what()).find("'bowl'"), std::string::npos) << e.what();
  }
}

TEST(LoadSod, KitchenScenarioHasEightObjects)
{
  const auto db = load_sod_file(SEMLOC_DATA_DIR "/kitchen/sod_kitchen.json");
  EXPECT_EQ(db.size(), 8u);
  int fixed = 0;
  for (const auto& o : db.objects())
    fixed += o.is_fixed();
  EXPECT_EQ(fixed, 6);
  EXPECT_FALSE(db.at("keys").is_fixed());
  EXPECT_FALSE(db.at("cell phone").is_fixed());
}

TEST(LoadSod, KnownDistanceUsesCentres)
{
  const auto db = load_sod(nlohmann::json::parse(R"([
    {"id":"a","room":"r","role":"fixed","centre":[0,0,0]},
    {"id":"b","room":"r","role":"fixed","centre":[3,4,0]},
    {"id":"c","room":"r","role":"fixed"}])"));
  EXPECT_DOUBLE_EQ(*db.known_distance("a", "b"), 5.0);
  EXPECT_FALSE(db.known_distance("a", "c").has_value());
  EXPECT_THROW(db.known_distance("a", "zzz"), ValidationError);
}

TEST(LoadSod, UnreadableFile) { EXPECT_THROW(load_sod_file("/nonexistent/sod.json"), ValidationError); }

TEST(SpdRendering, SplittingRecoversFragments)
{
  std::vector<SpdFragment> frags{{FragmentKind::Room, "keys", {"kitchen"}, std::nullopt, 0.0, "in the kitchen"},
                                 {FragmentKind::Proximity, "keys", {"sink"}, ProximityClass::Near, 0.4, "near the sink"}};
  const auto spd = combine(frags);
  std::vector<std::string> parts;
  std::string_view rest = spd.rendered;
  for (auto pos = rest.find(kFragmentSeparator); pos != std::string_view::npos; pos = rest.find(kFragmentSeparator))
  {
    parts.emplace_back(rest.substr(0, pos));
    rest.remove_prefix(pos + kFragmentSeparator.size());
  }
  parts.emplace_back(rest);
  ASSERT_EQ(parts.size(), spd.fragments.size());
  for (std::size_t i = 0; i < parts.size(); ++i)
    EXPECT_EQ(parts[i], spd.fragments[i].text);
}
