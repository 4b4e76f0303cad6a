// Walks a noisy mobile between two anchors and compares the two alignment tests position by position.

#include <cstdio>

#include "semloc/semloc.hpp"

using namespace semloc;

int main()
{
  RailScenario rail;
  rail.fixed_nodes = {{"B", "anchor B", "lab", Role::FixedReference, Vec3{-0.25, 0, 0}, 0},
                      {"C", "anchor C", "lab", Role::FixedReference, Vec3{7.25, 0, 0}, 0}};
  rail.samples_per_position = 200;

  const auto trace = run_rail_scenario(rail, NoiseModel::testbed_default(), 7);
  const double b_c = 7.5;
  std::printf("%5s %8s %8s   %-12s %-12s\n", "x", "B-M", "C-M", "original", "revised");
  for (const auto& e : trace)
  {
    const double bm = std::max(e.node("B").estimate->distance, 1e-6);
    const double cm = std::max(e.node("C").estimate->distance, 1e-6);
    std::printf("%5.2f %8.3f %8.3f   %-12s %-12s\n", e.position.x, bm, cm,
                std::string(to_string(alignment_original(b_c, bm, cm))).c_str(),
                std::string(to_string(alignment_revised(b_c, bm, cm))).c_str());
  }
}
