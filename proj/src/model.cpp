#include "gdadp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace gdadp {

namespace {

int find_node(const std::vector<Node>& nodes, const std::string& id) {
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (nodes[n].id == id) return static_cast<int>(n);
  }
  return -1;
}

}  // namespace

Incidence build_incidence(const std::vector<Node>& nodes, const std::vector<Arc>& arcs) {
  Incidence a = Incidence::Zero(static_cast<Eigen::Index>(nodes.size()),
                                static_cast<Eigen::Index>(arcs.size()));
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const Arc& arc = arcs[k];
    const int from = find_node(nodes, arc.from);
    const int to = find_node(nodes, arc.to);
    if (from < 0) throw ModelError("arc '" + arc.id + "': unknown from-node '" + arc.from + "'");
    if (to < 0) throw ModelError("arc '" + arc.id + "': unknown to-node '" + arc.to + "'");
    if (from == to) throw ModelError("arc '" + arc.id + "': self-loop on node '" + arc.from + "'");
    a(from, static_cast<Eigen::Index>(k)) = 1;
    a(to, static_cast<Eigen::Index>(k)) = -1;
  }
  return a;
}

SystemModel::SystemModel(Timeline timeline, std::vector<Node> nodes, std::vector<Arc> arcs)
    : timeline_(timeline), nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  std::unordered_map<std::string, int> seen;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (!seen.emplace(nodes_[n].id, static_cast<int>(n)).second) {
      throw ModelError("duplicate node id '" + nodes_[n].id + "'");
    }
  }
  incidence_ = build_incidence(nodes_, arcs_);
  for (const Arc& arc : arcs_) arc_ends_.emplace_back(node_index(arc.from), node_index(arc.to));
}

int SystemModel::node_index(const std::string& id) const {
  const int n = find_node(nodes_, id);
  if (n < 0) throw ModelError("unknown node id '" + id + "'");
  return n;
}

std::pair<double, double> SystemModel::node_flow_box(int node) const {
  double lo = 0.0;
  double hi = 0.0;
  for (int k = 0; k < num_arcs(); ++k) {
    const int sign = incidence_(node, k);
    if (sign == 0) continue;
    const double a = sign * arcs_[k].flow_min;
    const double b = sign * arcs_[k].flow_max;
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  return {lo, hi};
}

std::vector<double> SystemModel::initial_levels() const {
  std::vector<double> out;
  out.reserve(nodes_.size());
  for (const Node& node : nodes_) out.push_back(node.initial_level());
  return out;
}

std::string to_string(const Violation& v) {
  return v.where + ": " + v.field + ": " + v.message;
}

std::vector<Violation> validate_system(const SystemModel& model) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string where, std::string message) {
    out.push_back({std::move(field), std::move(where), std::move(message)});
  };
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  const Timeline& t = model.timeline();
  if (t.weeks < 1) add("weeks", "timeline", "must be at least 1");
  if (t.hours_per_week < 1) add("hours_per_week", "timeline", "must be at least 1");

  for (const Node& node : model.nodes()) {
    const std::string where = "node '" + node.id + "'";
    double max_cost = 0.0;
    for (std::size_t k = 0; k < node.clusters.size(); ++k) {
      const ThermalCluster& c = node.clusters[k];
      const std::string cw = where + " cluster " + std::to_string(k);
      if (!(c.capacity >= 0.0) || !std::isfinite(c.capacity)) add("capacity", cw, "must be finite and >= 0");
      if (!(c.marginal_cost >= 0.0) || !std::isfinite(c.marginal_cost)) {
        add("marginal_cost", cw, "must be finite and >= 0");
      }
      max_cost = std::max(max_cost, c.marginal_cost);
    }
    if (!(node.ens_penalty > max_cost)) {
      add("ens_penalty", where,
          "merit order: ens penalty " + num(node.ens_penalty) + " must exceed the highest cluster cost " +
              num(max_cost));
    }
    if (!(node.spill_penalty >= 0.0)) add("spill_penalty", where, "must be >= 0");
    if (!(node.final_penalty_rate >= 0.0)) add("final_penalty_rate", where, "must be >= 0");
    if (node.storage) {
      const Storage& s = *node.storage;
      if (!(s.capacity >= 0.0) || !std::isfinite(s.capacity)) add("capacity", where, "storage capacity must be >= 0");
      if (!(s.initial_level >= 0.0 && s.initial_level <= s.capacity)) {
        add("initial_level", where,
            "bounds: initial level " + num(s.initial_level) + " outside [0, " + num(s.capacity) + "]");
      }
      if (!(s.max_turbine >= 0.0)) add("max_turbine", where, "must be >= 0");
      if (!(s.max_pump >= 0.0)) add("max_pump", where, "must be >= 0");
      if (!(s.pump_efficiency > 0.0 && s.pump_efficiency <= 1.0)) {
        add("pump_efficiency", where, "must lie in (0, 1]");
      }
      if (node.final_target && !(*node.final_target >= 0.0 && *node.final_target <= s.capacity)) {
        add("final_target", where, "must lie in [0, capacity]");
      }
    } else if (node.final_target && *node.final_target != 0.0) {
      add("final_target", where, "node without storage cannot have a nonzero target");
    }
  }
  for (int k = 0; k < model.num_arcs(); ++k) {
    const Arc& arc = model.arcs()[k];
    const std::string where = "arc '" + arc.id + "'";
    if (!(arc.flow_min <= 0.0 && arc.flow_max >= 0.0)) {
      add("flow_min/flow_max", where, "bounds must satisfy flow_min <= 0 <= flow_max");
    }
    if (!std::isfinite(arc.flow_min) || !std::isfinite(arc.flow_max)) {
      add("flow_min/flow_max", where, "bounds must be finite");
    }
    if (!(arc.quad_cost > 0.0)) add("quad_cost", where, "must be strictly positive");
  }
  const Incidence& a = model.incidence();
  for (int k = 0; k < a.cols(); ++k) {
    int plus = 0, minus = 0;
    for (int n = 0; n < a.rows(); ++n) {
      plus += a(n, k) == 1;
      minus += a(n, k) == -1;
    }
    if (plus != 1 || minus != 1) add("incidence", "arc column " + std::to_string(k), "needs one +1 and one -1");
  }
  return out;
}

double hourly_dynamics(const Node& node, double level, double inflow, double turbine, double pump,
                       double spill) {
  if (!node.storage) {
    throw UnsupportedOperation("node '" + node.id + "' has no storage");
  }
  return level + inflow - turbine - spill + node.storage->pump_efficiency * pump;
}

double weekly_dynamics(const Node& node, double level0, std::span<const double> inflows,
                       std::span<const HourControl> controls) {
  if (inflows.size() != controls.size()) {
    throw ShapeError("weekly_dynamics: " + std::to_string(inflows.size()) + " inflows but " +
                     std::to_string(controls.size()) + " controls");
  }
  double level = level0;
  for (std::size_t h = 0; h < inflows.size(); ++h) {
    level = hourly_dynamics(node, level, inflows[h], controls[h].turbine, controls[h].pump, controls[h].spill);
  }
  return level;
}

}  // namespace gdadp
