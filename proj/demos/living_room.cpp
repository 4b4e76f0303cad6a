// Builds a tiny object database in code, feeds it a few ranges and prints what the engine says.

#include <iostream>

#include "semloc/semloc.hpp"

using namespace semloc;

int main()
{
  SodDatabase sod({
      {"tv", "television", "livingroom", Role::FixedReference, Vec3{0.0, 0.0, 0.0}, 0.45},
      {"sofa", "sofa", "livingroom", Role::FixedReference, Vec3{0.0, 3.0, 0.0}, 0.9},
      {"lamp", "floor lamp", "livingroom", Role::FixedReference, Vec3{2.0, 0.0, 0.0}, 0.15},
      {"fridge", "fridge", "kitchen", Role::FixedReference, Vec3{6.0, 0.0, 0.0}, 0.35},
      {"remote", "remote control", "livingroom", Role::Mobile, std::nullopt, 0.08},
  });

  EngineConfig cfg;
  cfg.capitalize_first = true;
  Engine engine(sod, cfg);

  // Inter-centre ranges, as a UWB tag would report them.
  auto range = [&](const char* ref, double d, double t) {
    engine.ingest({{"remote", ref, d, 1, DistanceSemantics::InterCentre}, t}, t);
  };
  range("tv", 1.02, 0.0);
  range("lamp", 1.01, 0.1);
  range("sofa", 3.16, 0.2);
  range("fridge", 5.1, 0.3);
  std::cout << engine.evaluate("remote", 0.3).rendered << "\n";

  // The remote is dropped next to the sofa.
  range("sofa", 0.95, 1.0);
  range("tv", 2.8, 1.1);
  range("lamp", 3.3, 1.2);
  std::cout << engine.evaluate("remote", 1.2).rendered << "\n";
}
