#pragma once

// Static description of the multinode system: two-timescale timeline, nodes
// with storage and thermal clusters, arcs with quadratic transport cost, and
// the node-arc incidence matrix.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gdadp {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Timeline {
  int weeks = 52;
  int hours_per_week = 168;

  /// Hourly instants including the terminal one after the last week.
  long total_instants() const { return static_cast<long>(weeks) * hours_per_week + 1; }
};

struct ThermalCluster {
  double capacity = 0.0;       // MW
  double marginal_cost = 0.0;  // EUR/MWh
};

struct Storage {
  double capacity = 0.0;       // MWh
  double initial_level = 0.0;  // MWh
  double max_turbine = 0.0;    // MW
  double max_pump = 0.0;       // MW
  double pump_efficiency = 1.0;
};

struct Node {
  std::string id;
  std::optional<Storage> storage;
  std::vector<ThermalCluster> clusters;
  double ens_penalty = 3000.0;        // EUR/MWh
  double spill_penalty = 0.0;         // EUR/MWh
  double final_penalty_rate = 150.0;  // EUR/MWh
  std::optional<double> final_target; // MWh, defaults to the initial level

  bool has_storage() const { return storage.has_value(); }
  double capacity() const { return storage ? storage->capacity : 0.0; }
  double initial_level() const { return storage ? storage->initial_level : 0.0; }
  double target() const { return final_target.value_or(initial_level()); }
};

struct Arc {
  std::string id;
  std::string from;
  std::string to;
  double flow_min = 0.0;   // MW
  double flow_max = 0.0;   // MW
  double quad_cost = 0.01; // EUR/(MW^2 h)
};

/// A(n, a) = +1 if arc a leaves node n, -1 if it enters n, 0 otherwise.
using Incidence = Eigen::MatrixXi;

Incidence build_incidence(const std::vector<Node>& nodes, const std::vector<Arc>& arcs);

class SystemModel {
 public:
  SystemModel(Timeline timeline, std::vector<Node> nodes, std::vector<Arc> arcs);

  const Timeline& timeline() const { return timeline_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Incidence& incidence() const { return incidence_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }
  int weeks() const { return timeline_.weeks; }
  int hours() const { return timeline_.hours_per_week; }

  /// Index of a node id; throws ModelError if unknown.
  int node_index(const std::string& id) const;
  int arc_from(int arc) const { return arc_ends_[arc].first; }
  int arc_to(int arc) const { return arc_ends_[arc].second; }

  /// Range of the nodal net import that any arc flow pattern can produce.
  std::pair<double, double> node_flow_box(int node) const;

  std::vector<double> initial_levels() const;

 private:
  Timeline timeline_;
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  Incidence incidence_;
  std::vector<std::pair<int, int>> arc_ends_;
};

struct Violation {
  std::string field;
  std::string where;
  std::string message;
};

std::string to_string(const Violation& v);

/// Checks every value invariant; an empty result means the system is valid.
std::vector<Violation> validate_system(const SystemModel& model);

struct HourControl {
  double turbine = 0.0;
  double pump = 0.0;
  double spill = 0.0;
};

double hourly_dynamics(const Node& node, double level, double inflow, double turbine, double pump,
                       double spill);

double weekly_dynamics(const Node& node, double level0, std::span<const double> inflows,
                       std::span<const HourControl> controls);

}  // namespace gdadp
