#pragma once

// Weekly policy simulation driven by a global cost-to-go, and the indicators
// computed from it.

#include <random>
#include <string>
#include <vector>

#include "gdadp/cost_to_go.hpp"
#include "gdadp/model.hpp"
#include "gdadp/scenarios.hpp"

namespace gdadp {

struct ChronicleRecord {
  std::string chronicle;
  double operational = 0.0;
  double thermal_cost = 0.0;
  double ens_cost = 0.0;
  double ens_energy = 0.0;  // MWh
  double spill_cost = 0.0;
  double transport_cost = 0.0;
  double final_penalty = 0.0;
  std::vector<std::vector<double>> levels;  // [week 0..|W|][node]
  // Hourly flows over the whole horizon, hour index = week * |H| + h.
  std::vector<std::vector<double>> node_flow;  // [hour][node]
  std::vector<std::vector<double>> arc_flow;   // [hour][arc]
};

struct SimulationOptions {
  JointOptions joint;
  int threads = 1;
};

ChronicleRecord simulate_chronicle(const SystemModel& model, const GlobalCostToGo& cost_to_go,
                                   const YearChronicle& chronicle, const std::vector<double>& initial_levels,
                                   const SimulationOptions& options = {});

/// max over (node, hour) of |node flow - (A arc flow)|.
double kirchhoff_residual(const SystemModel& model, const ChronicleRecord& record);

/// |operational - (thermal + ENS + spill + transport + final)| / max(1, |operational|).
double reconciliation_error(const ChronicleRecord& record);

struct Interval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double stddev = 0.0;
  int samples = 0;
  bool operator==(const Interval&) const = default;
};

/// Mean and normal 95% interval mean +- 1.96 sigma / sqrt(n).
Interval confidence_interval(const std::vector<double>& values);

/// Values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
int count_outliers(std::vector<double> values);

struct UpperBound {
  Interval cost;
  std::vector<ChronicleRecord> records;
};

UpperBound statistical_upper_bound(const SystemModel& model, const GlobalCostToGo& cost_to_go,
                                   const ScenarioSet& scenarios, int samples, std::mt19937_64& rng,
                                   const std::vector<double>& initial_levels, const SimulationOptions& options = {});

struct SimulationReport {
  std::string method;
  std::vector<ChronicleRecord> records;
  Interval operational;
  double thermal_cost = 0.0;  // means over records
  double ens_cost = 0.0;
  double ens_gwh = 0.0;
  double spill_cost = 0.0;
  double transport_cost = 0.0;
  double final_penalty = 0.0;
  int outliers = 0;
  double max_kirchhoff_residual = 0.0;
  double max_reconciliation_error = 0.0;
};

SimulationReport summarize(const SystemModel& model, const std::string& method, std::vector<ChronicleRecord> records);

SimulationReport evaluate_reference(const SystemModel& model, const GlobalCostToGo& cost_to_go,
                                    const ScenarioSet& evaluation, const std::vector<double>& initial_levels,
                                    const SimulationOptions& options = {});

}  // namespace gdadp
