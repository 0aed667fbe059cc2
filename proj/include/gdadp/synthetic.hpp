#pragma once

// Small generated instances. Micro instances use integer capacities, levels,
// demands and inflows, availabilities that keep cluster capacities integral,
// and arc ranges of 16 MW so that the secant breakpoints fall on integers; with
// that data the weekly problems have integral vertices and the exact DP on an
// integer grid carries no interpolation error.

#include <cstdint>

#include "gdadp/model.hpp"
#include "gdadp/scenarios.hpp"

namespace gdadp {

struct Instance {
  SystemModel model;
  ScenarioSet training;
  ScenarioSet evaluation;
};

Instance micro_instance(std::uint64_t seed);

/// Three-node tutorial: a hydro node, a node without storage, and a pumped
/// storage node, on a line.
Instance tutorial_instance(int weeks = 8, int hours_per_week = 24, int training = 5, int evaluation = 5,
                           std::uint64_t seed = 7);

}  // namespace gdadp
