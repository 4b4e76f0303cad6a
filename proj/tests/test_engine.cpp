#include <gtest/gtest.h>

#include "semloc/engine.hpp"

using namespace semloc;

namespace
{
SodDatabase kitchen() { return load_sod_file(SEMLOC_DATA_DIR "/kitchen/sod_kitchen.json"); }

RangingMessage msg(const std::string& a, const std::string& b, double d, double t,
                   DistanceSemantics sem = DistanceSemantics::EdgeToEdge)
{
  return {{a, b, d, 1, sem}, t};
}
}  // namespace

TEST(ParseRangingMessage, Valid)
{
  const auto m = parse_ranging_message(R"({"a":"keys","b":"kettle","distance_m":0.16,"timestamp":12.5})");
  EXPECT_EQ(m.estimate.a, "keys");
  EXPECT_EQ(m.estimate.b, "kettle");
  EXPECT_DOUBLE_EQ(m.estimate.distance, 0.16);
  EXPECT_EQ(m.estimate.semantics, DistanceSemantics::InterCentre);
  EXPECT_DOUBLE_EQ(*m.timestamp, 12.5);
}

TEST(ParseRangingMessage, Malformed)
{
  EXPECT_THROW(parse_ranging_message("not json"), ValidationError);
  EXPECT_THROW(parse_ranging_message("[]"), ValidationError);
  EXPECT_THROW(parse_ranging_message(R"({"a":"keys","distance_m":1})"), ValidationError);
  EXPECT_THROW(parse_ranging_message(R"({"a":"keys","b":"keys","distance_m":1})"), ValidationError);
  EXPECT_THROW(parse_ranging_message(R"({"a":"keys","b":"tv","distance_m":-1})"), ValidationError);
  EXPECT_THROW(parse_ranging_message(R"({"a":"keys","b":"tv","distance_m":"far"})"), ValidationError);
}

TEST(ParseRangingMessage, PayloadRoundTrip)
{
  RangingEstimate e{"keys", "kettle", 0.16, 3, DistanceSemantics::EdgeToEdge};
  const auto m = parse_ranging_message(to_payload(e, 4.0));
  EXPECT_EQ(m.estimate.a, e.a);
  EXPECT_EQ(m.estimate.distance, e.distance);
  EXPECT_EQ(m.estimate.sample_count, 3u);
  EXPECT_EQ(m.estimate.semantics, DistanceSemantics::EdgeToEdge);
  EXPECT_EQ(*m.timestamp, 4.0);
}

TEST(DistanceCache, OneEntryPerUnorderedPair)
{
  DistanceCache c(60);
  c.update({"a", "b", 1.0, 1, DistanceSemantics::InterCentre}, 0);
  c.update({"b", "a", 2.0, 1, DistanceSemantics::InterCentre}, 1);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.get("a", "b", 1)->estimate.distance, 2.0);
}

TEST(DistanceCache, OlderMessageDoesNotOverwrite)
{
  DistanceCache c(60);
  EXPECT_TRUE(c.update({"a", "b", 1.0, 1, DistanceSemantics::InterCentre}, 10));
  EXPECT_FALSE(c.update({"a", "b", 5.0, 1, DistanceSemantics::InterCentre}, 5));
  EXPECT_EQ(c.get("a", "b", 10)->estimate.distance, 1.0);
}

TEST(DistanceCache, StaleEntriesInvisible)
{
  DistanceCache c(60);
  c.update({"a", "b", 1.0, 1, DistanceSemantics::InterCentre}, 0);
  EXPECT_TRUE(c.get("a", "b", 60).has_value());
  EXPECT_FALSE(c.get("a", "b", 60.001).has_value());
  EXPECT_TRUE(c.involving("a", 61).empty());
}

TEST(Engine, IngestValidMessage)
{
  Engine e(kitchen(), {});
  const auto targets = e.ingest(msg("keys", "kettle", 0.16, 1), 1);
  EXPECT_EQ(targets, std::vector<ObjectId>{"keys"});
  EXPECT_TRUE(e.cache().contains("keys", "kettle"));
  EXPECT_EQ(e.counters().accepted, 1u);
}

TEST(Engine, UnknownIdDropped)
{
  Engine e(kitchen(), {});
  EXPECT_TRUE(e.ingest(msg("ghost", "kettle", 0.16, 1), 1).empty());
  EXPECT_EQ(e.cache().size(), 0u);
  EXPECT_EQ(e.counters().unknown_id, 1u);
}

TEST(Engine, LaterMessageWins)
{
  Engine e(kitchen(), {});
  e.ingest(msg("keys", "kettle", 0.16, 1), 1);
  e.ingest(msg("kettle", "keys", 0.50, 2), 2);
  EXPECT_DOUBLE_EQ(e.cache().get("keys", "kettle", 2)->estimate.distance, 0.50);
}

TEST(Engine, MalformedPayloadsCountedNeverThrow)
{
  Engine e(kitchen(), {});
  EXPECT_NO_THROW(e.ingest_payload("ranging/keys/kettle", "{oops", 0));
  EXPECT_NO_THROW(e.ingest_payload("ranging/keys/kettle", R"({"a":"keys","b":"bowl","distance_m":1})", 0));
  EXPECT_NO_THROW(e.ingest_payload("ranging/keys/kettle", R"({"a":"keys","b":"kettle","distance_m":1e9})", 0));
  EXPECT_EQ(e.counters().malformed, 2u);
  EXPECT_EQ(e.counters().implausible, 1u);
  EXPECT_EQ(e.cache().size(), 0u);
}

TEST(Engine, EvaluateNoFreshDistances)
{
  Engine e(kitchen(), {});
  EXPECT_TRUE(e.evaluate("keys", 0).empty());
  e.ingest(msg("keys", "kettle", 0.16, 0), 0);
  EXPECT_FALSE(e.evaluate("keys", 10).empty());
  EXPECT_TRUE(e.evaluate("keys", 61).empty());
  EXPECT_THROW(e.evaluate("ghost", 0), ValidationError);
}

TEST(Engine, EvaluateKeysRoomAndNearest)
{
  EngineConfig cfg;
  cfg.alignment_enabled = false;
  Engine e(kitchen(), cfg);
  e.ingest(msg("keys", "kettle", 0.16, 0), 0);
  e.ingest(msg("keys", "coffee maker", 0.91, 0), 0);
  e.ingest(msg("keys", "fridge", 2.24, 0), 0);
  EXPECT_EQ(e.evaluate("keys", 0).rendered, "in the kitchen, very close to the kettle");
}

TEST(Engine, InterCentreRangesConvertedWithRadii)
{
  EngineConfig cfg;
  cfg.alignment_enabled = false;
  cfg.room_enabled = false;
  Engine e(kitchen(), cfg);
  // keys radius 0.05, kettle radius 0.10: 0.65 m between centres is 0.50 m edge to edge.
  e.ingest(msg("keys", "kettle", 0.65, 0, DistanceSemantics::InterCentre), 0);
  EXPECT_EQ(e.evaluate("keys", 0).rendered, "near the kettle");
  cfg.proximity_semantics = DistanceSemantics::InterCentre;
  e.set_config(cfg);
  EXPECT_EQ(e.evaluate("keys", 0).rendered, "in the vicinity of the kettle");
}

TEST(Engine, FixedToFixedRangeTouchesTrackedTargets)
{
  Engine e(kitchen(), {});
  e.ingest(msg("keys", "kettle", 0.16, 0), 0);
  EXPECT_EQ(e.ingest(msg("coffee maker", "kettle", 1.15, 0), 0), std::vector<ObjectId>{"keys"});
}

TEST(Engine, AlignmentUsesMeasuredBaseWhenNoPositions)
{
  EngineConfig cfg;
  cfg.room_enabled = false;
  cfg.proximity_enabled = false;
  Engine e(kitchen(), cfg);
  e.ingest(msg("keys", "kettle", 0.16, 0), 0);
  e.ingest(msg("keys", "coffee maker", 0.91, 0), 0);
  EXPECT_TRUE(e.evaluate("keys", 0).empty());
  e.ingest(msg("coffee maker", "kettle", 1.15, 0), 0);
  EXPECT_EQ(e.evaluate("keys", 0).rendered, "between the coffee maker and the kettle");
}

TEST(Engine, EvaluateIsDeterministic)
{
  Engine e(kitchen(), {});
  for (const auto& [ref, d] : std::vector<std::pair<std::string, double>>{
           {"kettle", 0.16}, {"coffee maker", 0.91}, {"bowl", 1.09}, {"vase", 1.42}})
    e.ingest(msg("keys", ref, d, 0), 0);
  e.ingest(msg("coffee maker", "kettle", 1.15, 0), 0);
  e.ingest(msg("bowl", "kettle", 1.08, 0), 0);
  const auto first = e.evaluate("keys", 0).rendered;
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(e.evaluate("keys", 0).rendered, first);
}
