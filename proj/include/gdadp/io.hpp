#pragma once

// JSON and CSV artifacts. Every JSON artifact carries "schema_version" and
// "kind"; readers refuse any other version.

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdadp/coordinator.hpp"
#include "gdadp/cost_to_go.hpp"
#include "gdadp/model.hpp"
#include "gdadp/policy_sim.hpp"
#include "gdadp/price.hpp"
#include "gdadp/reference.hpp"

namespace gdadp::io {

inline constexpr int kSchemaVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);
/// Writes to a sibling temporary file and renames it over `path`.
void write_json_atomic(const std::filesystem::path& path, const Json& doc);

/// Throws IoError unless doc has the current schema version and the given kind.
void check_artifact(const Json& doc, const std::string& kind, const std::string& where);
Json artifact(const std::string& kind);

// System description. Field names:
//   timeline: {weeks, hours_per_week}
//   nodes[]: {id, storage?: {capacity, initial_level, max_turbine, max_pump, pump_efficiency},
//             clusters[]: {capacity, marginal_cost},
//             penalties: {ens, spill, final_rate, final_target?}}
//   arcs[]: {id, from, to, flow_min, flow_max, quad_cost}
// schema_version is optional in hand-written system files.
Json system_to_json(const SystemModel& model);
SystemModel system_from_json(const Json& doc);
SystemModel load_system(const std::filesystem::path& path);

Json price_to_json(const PriceProcess& price);
PriceProcess price_from_json(const Json& doc);

/// In-memory form of a cost-to-go artifact of any method.
struct CostToGoArtifact {
  std::string method;  // dadp, sddp or exact
  double lower_bound = 0.0;
  std::vector<double> initial_levels;
  // dadp: [node][week 0..|W|]
  std::vector<std::vector<std::vector<Cut>>> node_cuts;
  std::vector<std::vector<std::vector<double>>> node_grid;
  std::vector<std::vector<std::vector<double>>> node_values;
  std::vector<double> transport_constants;
  // sddp: [week 0..|W|]
  std::vector<std::vector<MultiCut>> multi_cuts;
  // exact
  std::vector<std::vector<double>> axes;
  std::vector<std::vector<double>> tables;

  std::unique_ptr<GlobalCostToGo> build(const SystemModel& model) const;
  bool operator==(const CostToGoArtifact&) const = default;
};

CostToGoArtifact dadp_artifact(const std::vector<NodeValueFunction>& vfs, std::vector<double> transport_constants,
                               double lower_bound, std::vector<double> initial_levels);
CostToGoArtifact sddp_artifact(const SddpResult& result, std::vector<double> initial_levels);
CostToGoArtifact exact_artifact(const ExactDP& exact);

Json cost_to_go_to_json(const CostToGoArtifact& a);
CostToGoArtifact cost_to_go_from_json(const Json& doc);

Json trace_to_json(const std::vector<TraceEntry>& trace, const std::string& stop_reason);
std::vector<TraceEntry> trace_from_json(const Json& doc);

/// Aggregates of one simulated method; wall time is kept out so that a fixed
/// seed reproduces the file byte for byte.
struct Report {
  std::string method;
  double lower_bound = 0.0;
  Interval upper_bound;  // product-measure samples; samples == 0 when skipped
  Interval evaluation;   // operational cost over the evaluation chronicles
  double thermal_cost = 0.0;
  double ens_cost = 0.0;
  double ens_gwh = 0.0;
  double spill_cost = 0.0;
  double transport_cost = 0.0;
  double final_penalty = 0.0;
  int outliers = 0;
  double max_kirchhoff_residual = 0.0;
  double max_reconciliation_error = 0.0;

  bool operator==(const Report&) const = default;
};

Report make_report(const SimulationReport& evaluation, double lower_bound, const Interval& upper_bound);
Json report_to_json(const Report& r);
Report report_from_json(const Json& doc);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

void write_records_csv(const std::filesystem::path& path, const std::vector<ChronicleRecord>& records);
void write_trajectories_csv(const std::filesystem::path& path, const SystemModel& model,
                            const std::vector<ChronicleRecord>& records);

/// (UB - LB) / LB in percent.
double gap_percent(double lower_bound, double upper_bound);

}  // namespace gdadp::io
