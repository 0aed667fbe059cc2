#pragma once

// Price decomposition coordinator: the dual oracle (value and supergradient of
// the Lagrangian dual at a price) and its limited-memory quasi-Newton ascent.

#include <functional>
#include <string>
#include <vector>

#include "gdadp/nodal_sdp.hpp"
#include "gdadp/price.hpp"
#include "gdadp/scenarios.hpp"
#include "gdadp/transport.hpp"

namespace gdadp {

struct OracleOptions {
  NodalOptions nodal;
  int threads = 1;
};

struct OracleResult {
  double value = 0.0;
  std::vector<double> gradient;     // PriceProcess layout
  std::vector<double> node_values;  // first-week nodal values at the initial levels
  double transport_value = 0.0;
  std::vector<NodeValueFunction> value_functions;
  TransportSolution transport;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

OracleResult oracle(const SystemModel& model, const ScenarioSet& training, const std::vector<double>& initial_levels,
                    const PriceProcess& price, const OracleOptions& options = {});

/// The oracle value: an exact lower bound of the global optimum.
double lower_bound(const OracleResult& result);

struct AscentConfig {
  int max_iterations = 50;
  double time_limit_seconds = 0.0;  // 0 means no limit
  double tolerance = 100.0;         // EUR of best-value improvement
  double relative_tolerance = 0.0;  // the threshold is max(tolerance, relative_tolerance * |best|)
  int memory = 10;
  double initial_step = 10.0;       // EUR/MWh, length of the first trial step
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 30;
};

struct TraceEntry {
  int iteration = 0;
  double value = 0.0;
  double best = 0.0;
  double gradient_norm = 0.0;
  double step = 0.0;
  int line_search = 0;
  double wall_seconds = 0.0;
};

struct AscentResult {
  PriceProcess best_price;
  OracleResult best;
  std::vector<TraceEntry> trace;
  std::string stop_reason;
  int oracle_calls = 0;
};

using AscentCallback = std::function<void(const TraceEntry&, const PriceProcess& current, const PriceProcess& best)>;

AscentResult improve_prices(const SystemModel& model, const ScenarioSet& training,
                            const std::vector<double>& initial_levels, const PriceProcess& start,
                            const AscentConfig& config, const OracleOptions& options = {},
                            const AscentCallback& on_iteration = {});

}  // namespace gdadp
