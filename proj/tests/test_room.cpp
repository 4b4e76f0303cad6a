#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semloc/room.hpp"

using namespace semloc;

namespace
{
SodDatabase house()
{
  return load_sod(nlohmann::json::parse(R"([
    {"id":"tv","room":"livingroom","role":"fixed"},
    {"id":"sofa","room":"livingroom","role":"fixed"},
    {"id":"sink","room":"kitchen","role":"fixed"},
    {"id":"fridge","room":"kitchen","role":"fixed"},
    {"id":"oven","room":"kitchen","role":"fixed"},
    {"id":"bed","room":"bedroom","role":"fixed"},
    {"id":"keys","room":"livingroom","role":"mobile"}])"));
}
}  // namespace

TEST(RoomDetermination, Unanimous)
{
  const auto db = house();
  std::vector<ReferenceDistance> n{{"sink", 1.0}, {"fridge", 2.0}, {"oven", 0.5}};
  const auto f = room_determination("keys", n, db);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->text, "in the kitchen");
  EXPECT_EQ(f->kind, FragmentKind::Room);
  EXPECT_EQ(f->references, std::vector<ObjectId>{"kitchen"});
}

TEST(RoomDetermination, MajorityOfThree)
{
  const auto db = house();
  std::vector<ReferenceDistance> n{{"tv", 0.5}, {"sofa", 2.0}, {"sink", 3.0}};
  EXPECT_EQ(oracle::room_vote({{"livingroom", 0.5}, {"livingroom", 2.0}, {"kitchen", 3.0}}, 3), "livingroom");
  EXPECT_EQ(room_determination("keys", n, db)->text, "in the livingroom");
}

TEST(RoomDetermination, OnlyKClosestVote)
{
  const auto db = house();
  // Three kitchen objects outnumber two living-room ones, but only the closest three vote.
  std::vector<ReferenceDistance> n{{"sink", 3.0}, {"fridge", 3.5}, {"oven", 4.0}, {"tv", 0.5}, {"sofa", 0.7}};
  EXPECT_EQ(room_determination("keys", n, db)->text, "in the livingroom");
  RoomVoteConfig all{5, 5.0};
  EXPECT_EQ(room_determination("keys", n, db, all)->text, "in the kitchen");
}

TEST(RoomDetermination, TieBrokenBySummedDistanceThenName)
{
  const auto db = house();
  RoomVoteConfig two{2, 5.0};
  std::vector<ReferenceDistance> n{{"tv", 1.0}, {"sink", 0.8}};
  EXPECT_EQ(room_determination("keys", n, db, two)->text, "in the kitchen");
  std::vector<ReferenceDistance> equal{{"tv", 1.0}, {"sink", 1.0}};
  EXPECT_EQ(room_determination("keys", equal, db, two)->text, "in the kitchen");  // "kitchen" < "livingroom"
}

TEST(RoomDetermination, OutOfRangeNeighboursIgnored)
{
  const auto db = house();
  std::vector<ReferenceDistance> n{{"tv", 6.0}, {"sink", 7.0}};
  EXPECT_FALSE(room_determination("keys", n, db).has_value());
  std::vector<ReferenceDistance> none;
  EXPECT_FALSE(room_determination("keys", none, db).has_value());
  std::vector<ReferenceDistance> one_in{{"tv", 6.0}, {"bed", 4.9}};
  EXPECT_EQ(room_determination("keys", one_in, db)->text, "in the bedroom");
}

TEST(RoomDetermination, Errors)
{
  const auto db = house();
  std::vector<ReferenceDistance> ghost{{"ghost", 1.0}};
  EXPECT_THROW(room_determination("keys", ghost, db), ValidationError);
  std::vector<ReferenceDistance> negative{{"tv", -1.0}};
  EXPECT_THROW(room_determination("keys", negative, db), ValidationError);
  std::vector<ReferenceDistance> ok{{"tv", 1.0}};
  EXPECT_THROW(room_determination("keys", ok, db, RoomVoteConfig{0, 5.0}), ValidationError);
}
