#pragma once

// Nodal stochastic dynamic programming for a fixed price process: weekly
// stages, one storage state per node, value functions kept both as cuts and as
// values/price-gradients sampled on a storage grid.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gdadp/lp.hpp"
#include "gdadp/model.hpp"
#include "gdadp/price.hpp"
#include "gdadp/scenarios.hpp"

namespace gdadp {

struct Cut {
  double intercept = 0.0;
  double slope = 0.0;
  double operator()(double level) const { return intercept + slope * level; }
  bool operator==(const Cut&) const = default;
};

class EmptyCutsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeekValue {
  std::vector<Cut> cuts;
  std::vector<double> grid;    // sorted storage levels
  std::vector<double> values;  // expected cost at each grid level
  std::vector<double> slopes;  // averaged initial-level dual at each grid level
  // Price gradient at each grid level over the blocks of this week and all later ones.
  std::vector<std::vector<double>> gradients;
  // Inputs of the gradient recursion: expected block import sums per grid level,
  // and the end-of-week level reached under each training chronicle.
  std::vector<std::vector<double>> block_flows;
  std::vector<std::vector<double>> next_levels;
};

struct NodeValueFunction {
  int node = 0;
  int blocks_per_week = 1;
  std::vector<WeekValue> weeks;  // weeks.size() == |W| + 1, the last one is terminal
  bool exact = true;             // every grid segment verified linear
  long clamped = 0;              // next levels outside the grid hull
  long lp_solves = 0;

  int num_weeks() const { return static_cast<int>(weeks.size()) - 1; }
};

struct NodalOptions {
  int grid_points = 51;
  bool refine = true;
  int max_points_per_week = 400;
  double refine_tolerance = 1e-9;  // relative to max(1, |value|)
  // Replaces the import range derived from the arcs (for isolated tests).
  std::optional<std::pair<double, double>> flow_box;
  // Level forced into the week-0 grid; defaults to the node's initial level.
  std::optional<double> initial_level;
  // Extra levels forced into the grid of every week.
  std::vector<double> extra_levels;
};

struct WeeklySolution {
  double objective = 0.0;  // operational + price term + next-week value
  double operational = 0.0;
  double thermal_cost = 0.0;
  double ens_cost = 0.0;
  double spill_cost = 0.0;
  double price_term = 0.0;
  double future = 0.0;
  std::vector<std::vector<double>> thermal;  // [hour][cluster]
  std::vector<double> ens, curtail, turbine, pump, spill, flow, level;
  double next_level = 0.0;
  double level_dual = 0.0;
};

double final_cost(const Node& node, double level);

/// The two exact pieces of the final penalty.
std::vector<Cut> final_cost_cuts(const Node& node);

double evaluate_value(std::span<const Cut> cuts, double level);

/// Breakpoints (level, value) of the max of `cuts` on [lo, hi], both ends included.
std::vector<std::pair<double, double>> cut_envelope(std::span<const Cut> cuts, double lo, double hi);

/// Adds max-of-cuts of `level_col` to the objective as ordered segment columns
/// and returns the value at `lo` (to be added as a constant).
double append_envelope(lp::Problem& lp, int level_col, std::span<const Cut> cuts, double lo, double hi,
                       std::vector<int>* segment_cols = nullptr);
double evaluate_value(const NodeValueFunction& vf, int week, double level);

std::pair<double, double> nodal_flow_box(const SystemModel& model, int node, const NodalOptions& options);

/// One deterministic week for one node. `hour_prices` holds the hourly price of
/// the node for this week, `next_cuts` the value function at the end of the week.
WeeklySolution solve_weekly_subproblem(const SystemModel& model, int node, double level,
                                       const NodeWeekSeries& chronicle, std::span<const double> hour_prices,
                                       std::span<const Cut> next_cuts, const NodalOptions& options = {});

std::vector<double> uniform_grid(double capacity, int points, std::span<const double> extra = {});

/// Backward recursion over weeks. With refinement on, the grid of each week is
/// split until the cut model is verified linear between adjacent grid levels, so
/// interpolated values equal the cut model and interpolated gradients are
/// supergradients.
NodeValueFunction backward_recursion(const SystemModel& model, int node, const HourlySeries& hourly_price,
                                     const BlockScheme& scheme, const ScenarioSet& training,
                                     const NodalOptions& options = {});

/// Fills WeekValue::gradients from the recorded flows and next levels.
void gradient_recursion(NodeValueFunction& vf);

/// Piecewise-linear interpolation of the grid values / gradients of a week.
double interpolate_value(const NodeValueFunction& vf, int week, double level);
std::vector<double> interpolate_gradient(const NodeValueFunction& vf, int week, double level,
                                         long* clamped = nullptr);

}  // namespace gdadp
