#pragma once

// Reference solvers on small instances: backward dynamic programming on a
// product grid of storage levels, and a weekly-stage SDDP baseline.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gdadp/cost_to_go.hpp"
#include "gdadp/policy_sim.hpp"

namespace gdadp {

class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExactDpOptions {
  JointOptions joint;
  long max_stage_solves = 1000000;
  int threads = 1;
};

struct ExactDP {
  ProductGrid grid;
  std::vector<std::vector<double>> tables;  // tables[s][point], s = 0..|W|
  std::vector<double> initial_levels;
  double optimum = 0.0;
  long stage_solves = 0;

  ExactDpCostToGo cost_to_go(const SystemModel& model) const { return ExactDpCostToGo(model, grid, tables); }
};

/// Per-node grids: `points` uniform levels plus the initial level and the final
/// target; nodes without storage get {0}.
std::vector<std::vector<double>> reference_grids(const SystemModel& model, int points,
                                                 const std::vector<double>& initial_levels);

/// Every integer level in [0, capacity] (plus the initial level and target).
std::vector<std::vector<double>> integer_grids(const SystemModel& model, const std::vector<double>& initial_levels);

ExactDP exact_global_dp(const SystemModel& model, const ScenarioSet& scenarios,
                        const std::vector<std::vector<double>>& grids, const std::vector<double>& initial_levels,
                        const ExactDpOptions& options = {});

ChronicleRecord rollout_exact_policy(const SystemModel& model, const ExactDP& exact, const YearChronicle& chronicle,
                                     const JointOptions& joint = {});

struct SddpConfig {
  int max_iterations = 200;
  int samples = 1;             // forward trajectories per iteration
  double tolerance = 100.0;    // EUR of lower-bound improvement
  int stall_iterations = 2;    // consecutive small improvements before stopping
  double time_limit_seconds = 0.0;
  std::uint64_t seed = 1;
  JointOptions joint;
};

struct SddpResult {
  SddpCostToGo cost_to_go;
  std::vector<double> lower_bounds;  // one per iteration
  int iterations = 0;
  std::string stop_reason;

  double lower_bound() const { return lower_bounds.empty() ? 0.0 : lower_bounds.back(); }
};

SddpResult sddp_solve(const SystemModel& model, const ScenarioSet& scenarios, const std::vector<double>& initial_levels,
                      const SddpConfig& config);

}  // namespace gdadp
