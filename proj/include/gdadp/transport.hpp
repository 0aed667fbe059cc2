#pragma once

// Arc price value function: for a deterministic price the transport problem
// splits into independent one-dimensional box-constrained quadratics.

#include "gdadp/model.hpp"
#include "gdadp/price.hpp"

namespace gdadp {

struct ArcFlows {
  int arcs = 0;
  int weeks = 0;
  int hours = 0;
  std::vector<double> data;  // (arc, week, hour)

  double& at(int a, int w, int h) { return data[(static_cast<std::size_t>(a) * weeks + w) * hours + h]; }
  double at(int a, int w, int h) const { return data[(static_cast<std::size_t>(a) * weeks + w) * hours + h]; }
};

struct TransportSolution {
  ArcFlows flows;
  double value = 0.0;
  std::vector<double> week_values;  // contribution of each week
};

/// Minimizer and value of gamma f^2 - r f over [lo, hi].
double transport_flow(double gamma, double lo, double hi, double reduced_price);
double transport_term(double gamma, double flow, double reduced_price);

TransportSolution solve_transport(const SystemModel& model, const HourlySeries& hourly_price);

/// -(A f*) per node-hour, the hourly supergradient of the arc value function.
HourlySeries transport_hourly_gradient(const SystemModel& model, const TransportSolution& solution);

/// Block-aggregated gradient, laid out like PriceProcess::values().
std::vector<double> transport_gradient(const SystemModel& model, const TransportSolution& solution,
                                       const BlockScheme& scheme);

/// Transport value over weeks >= week; constant in the storage state.
double transport_cost_to_go(const TransportSolution& solution, int week);
double transport_cost_to_go(const SystemModel& model, const PriceProcess& price, int week);

}  // namespace gdadp
