#include "gdadp/cost_to_go.hpp"

#include <algorithm>
#include <cmath>

namespace gdadp {

void append_final_cost(const SystemModel& model, lp::Problem& lp, const std::vector<int>& level_cols) {
  for (int n = 0; n < model.num_nodes(); ++n) {
    const Node& nd = model.nodes()[n];
    if (level_cols[n] < 0 || nd.final_penalty_rate <= 0.0) continue;
    const int shortfall = lp.add_column(nd.final_penalty_rate, 0.0, lp::kInf);
    lp.add_row(nd.target(), lp::kInf, {{shortfall, 1.0}, {level_cols[n], 1.0}});
  }
}

double total_final_cost(const SystemModel& model, const std::vector<double>& levels) {
  double v = 0.0;
  for (int n = 0; n < model.num_nodes(); ++n) {
    if (model.nodes()[n].has_storage()) v += final_cost(model.nodes()[n], levels[n]);
  }
  return v;
}

DadpProxy::DadpProxy(const SystemModel& model, std::vector<std::vector<std::vector<Cut>>> cuts,
                     std::vector<double> transport_constants)
    : model_(&model), cuts_(std::move(cuts)), transport_(std::move(transport_constants)) {
  if (static_cast<int>(cuts_.size()) != model.num_nodes()) throw ShapeError("DadpProxy: one cut set per node");
  for (const auto& c : cuts_) {
    if (static_cast<int>(c.size()) != model.weeks() + 1) throw ShapeError("DadpProxy: cuts for |W|+1 weeks expected");
  }
  if (static_cast<int>(transport_.size()) != model.weeks() + 1) {
    throw ShapeError("DadpProxy: transport constants for |W|+1 weeks expected");
  }
}

namespace {
std::vector<std::vector<std::vector<Cut>>> cuts_of(const std::vector<NodeValueFunction>& vfs) {
  std::vector<std::vector<std::vector<Cut>>> out;
  for (const auto& vf : vfs) {
    std::vector<std::vector<Cut>> node;
    for (const auto& w : vf.weeks) node.push_back(w.cuts);
    out.push_back(std::move(node));
  }
  return out;
}
}  // namespace

DadpProxy::DadpProxy(const SystemModel& model, const std::vector<NodeValueFunction>& vfs,
                     std::vector<double> transport_constants)
    : DadpProxy(model, cuts_of(vfs), std::move(transport_constants)) {}

void DadpProxy::append(int week, lp::Problem& lp, const std::vector<int>& level_cols) const {
  for (int n = 0; n < model_->num_nodes(); ++n) {
    if (level_cols[n] < 0) continue;
    append_envelope(lp, level_cols[n], cuts_[n].at(week), 0.0, model_->nodes()[n].capacity());
  }
}

double DadpProxy::constant(int week) const {
  double v = transport_.at(week);
  for (int n = 0; n < model_->num_nodes(); ++n) {
    // Storage nodes: value at an empty reservoir; append() adds the rest.
    v += evaluate_value(cuts_[n].at(week), 0.0);
  }
  return v;
}

double DadpProxy::evaluate(int week, const std::vector<double>& levels) const {
  double v = transport_.at(week);
  for (int n = 0; n < model_->num_nodes(); ++n) v += evaluate_value(cuts_[n].at(week), levels[n]);
  return v;
}

double MultiCut::operator()(const std::vector<double>& x) const {
  double v = intercept;
  for (std::size_t i = 0; i < slopes.size(); ++i) v += slopes[i] * x[i];
  return v;
}

void SddpCostToGo::append(int week, lp::Problem& lp, const std::vector<int>& level_cols) const {
  const int theta = lp.add_column(1.0, 0.0, lp::kInf);
  for (const MultiCut& c : cuts_.at(week)) {
    std::vector<lp::Entry> row{{theta, 1.0}};
    for (int n = 0; n < model_->num_nodes(); ++n) {
      if (level_cols[n] >= 0 && c.slopes[n] != 0.0) row.push_back({level_cols[n], -c.slopes[n]});
    }
    lp.add_row(c.intercept, lp::kInf, std::move(row));
  }
}

double SddpCostToGo::evaluate(int week, const std::vector<double>& levels) const {
  double v = 0.0;
  for (const MultiCut& c : cuts_.at(week)) v = std::max(v, c(levels));
  return v;
}

ProductGrid::ProductGrid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)), size_(1) {
  for (auto& a : axes_) {
    if (a.empty()) throw ShapeError("ProductGrid: empty axis");
    std::sort(a.begin(), a.end());
    size_ *= a.size();
  }
}

std::vector<double> ProductGrid::point(std::size_t index) const {
  std::vector<double> x(axes_.size());
  for (int d = dims() - 1; d >= 0; --d) {
    x[d] = axes_[d][index % axes_[d].size()];
    index /= axes_[d].size();
  }
  return x;
}

long ProductGrid::find(const std::vector<double>& levels, double tol) const {
  long index = 0;
  for (int d = 0; d < dims(); ++d) {
    const auto& a = axes_[d];
    long hit = -1;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - levels[d]) <= tol * std::max(1.0, std::abs(a[i]))) hit = static_cast<long>(i);
    }
    if (hit < 0) return -1;
    index = index * static_cast<long>(a.size()) + hit;
  }
  return index;
}

void ExactDpCostToGo::append(int week, lp::Problem& lp, const std::vector<int>& level_cols) const {
  const auto& table = tables_.at(week);
  std::vector<lp::Entry> convex;
  std::vector<std::vector<lp::Entry>> coupling(model_->num_nodes());
  for (int n = 0; n < model_->num_nodes(); ++n) {
    if (level_cols[n] >= 0) coupling[n].push_back({level_cols[n], 1.0});
  }
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const int lam = lp.add_column(table[i], 0.0, lp::kInf);
    convex.push_back({lam, 1.0});
    const std::vector<double> x = grid_.point(i);
    for (int n = 0; n < model_->num_nodes(); ++n) {
      if (level_cols[n] >= 0 && x[n] != 0.0) coupling[n].push_back({lam, -x[n]});
    }
  }
  lp.add_row(1.0, 1.0, std::move(convex));
  for (int n = 0; n < model_->num_nodes(); ++n) {
    if (level_cols[n] >= 0) lp.add_row(0.0, 0.0, std::move(coupling[n]));
  }
}

double ExactDpCostToGo::evaluate(int week, const std::vector<double>& levels) const {
  lp::Problem p;
  std::vector<int> cols;
  for (int n = 0; n < model_->num_nodes(); ++n) {
    cols.push_back(model_->nodes()[n].has_storage() ? p.add_column(0.0, levels[n], levels[n]) : -1);
  }
  append(week, p, cols);
  lp::DenseSimplex s(p);
  const lp::Status st = s.solve();
  if (st != lp::Status::Optimal) {
    throw lp::SolveError(st, "exact cost-to-go: levels outside the grid hull at week " + std::to_string(week));
  }
  return s.objective();
}

JointWeekLp::JointWeekLp(const SystemModel& model, const WeeklyChronicle& wk, const std::vector<double>& levels,
                         const GlobalCostToGo* ctg, int week, JointOptions options)
    : model_(model), week_(week) {
  const int nn = model.num_nodes();
  const int hours = model.hours();
  const Incidence& inc = model.incidence();
  x0_.assign(nn, -1);
  cols_.resize(nn);
  for (int n = 0; n < nn; ++n) {
    const Node& nd = model.nodes()[n];
    if (nd.has_storage()) x0_[n] = p_.add_column(0.0, levels[n], levels[n]);
    const auto box = model.node_flow_box(n);
    const NodeWeekSeries& ser = wk.nodes[n];
    for (int h = 0; h < hours; ++h) {
      NodeHour c;
      std::vector<lp::Entry> bal;
      for (const ThermalCluster& cl : nd.clusters) {
        c.thermal.push_back(p_.add_column(cl.marginal_cost, 0.0, ser.availability[h] * cl.capacity));
        bal.push_back({c.thermal.back(), 1.0});
      }
      c.ens = p_.add_column(nd.ens_penalty, 0.0, lp::kInf);
      c.curtail = p_.add_column(nd.spill_penalty, 0.0, lp::kInf);
      c.flow = p_.add_column(0.0, box.first, box.second);
      bal.push_back({c.ens, 1.0});
      bal.push_back({c.curtail, -1.0});
      bal.push_back({c.flow, 1.0});
      if (nd.has_storage()) {
        const Storage& s = *nd.storage;
        c.turbine = p_.add_column(0.0, 0.0, s.max_turbine);
        c.pump = p_.add_column(0.0, 0.0, s.max_pump);
        c.spill = p_.add_column(nd.spill_penalty, 0.0, lp::kInf);
        c.level = p_.add_column(0.0, 0.0, s.capacity);
        bal.push_back({c.turbine, 1.0});
        bal.push_back({c.pump, -1.0});
        const int prev = h == 0 ? x0_[n] : cols_[n][h - 1].level;
        p_.add_row(ser.inflow[h], ser.inflow[h],
                   {{c.level, 1.0}, {prev, -1.0}, {c.turbine, 1.0}, {c.pump, -s.pump_efficiency}, {c.spill, 1.0}});
      }
      p_.add_row(ser.net_demand[h], ser.net_demand[h], std::move(bal));
      cols_[n].push_back(std::move(c));
    }
  }
  const int segments = std::max(1, options.secant_segments);
  segs_.resize(model.num_arcs());
  for (int a = 0; a < model.num_arcs(); ++a) {
    const Arc& arc = model.arcs()[a];
    const double w = (arc.flow_max - arc.flow_min) / segments;
    seg_width_.push_back(w);
    for (int h = 0; h < hours; ++h) {
      std::vector<int> ks;
      if (w > 0.0) {
        for (int k = 0; k < segments; ++k) {
          ks.push_back(p_.add_column(arc.quad_cost * (2.0 * arc.flow_min + (2.0 * k + 1.0) * w), 0.0, w));
        }
      }
      constant_ += arc.quad_cost * arc.flow_min * arc.flow_min;
      segs_[a].push_back(std::move(ks));
    }
  }
  for (int n = 0; n < nn; ++n) {
    for (int h = 0; h < hours; ++h) {
      std::vector<lp::Entry> row{{cols_[n][h].flow, 1.0}};
      double rhs = 0.0;
      for (int a = 0; a < model.num_arcs(); ++a) {
        const int sign = inc(n, a);
        if (sign == 0) continue;
        rhs += sign * model.arcs()[a].flow_min;
        for (int k : segs_[a][h]) row.push_back({k, -static_cast<double>(sign)});
      }
      p_.add_row(rhs, rhs, std::move(row));
    }
  }
  first_future_col_ = p_.num_columns();
  std::vector<int> level_cols(nn, -1);
  for (int n = 0; n < nn; ++n) {
    if (model.nodes()[n].has_storage()) level_cols[n] = cols_[n].back().level;
  }
  if (week + 1 >= model.weeks()) {
    append_final_cost(model, p_, level_cols);
  } else if (ctg) {
    ctg->append(week + 1, p_, level_cols);
    future_constant_ = ctg->constant(week + 1);
  }
  simplex_ = std::make_unique<lp::DenseSimplex>(p_);
}

void JointWeekLp::set_levels(const std::vector<double>& levels) {
  for (int n = 0; n < model_.num_nodes(); ++n) {
    if (x0_[n] >= 0) simplex_->set_column_bounds(x0_[n], levels[n], levels[n]);
  }
}

double JointWeekLp::solve() {
  const lp::Status st = simplex_->solve();
  if (st != lp::Status::Optimal) {
    throw lp::SolveError(st, "joint weekly problem at week " + std::to_string(week_) + ": " + lp::to_string(st));
  }
  return simplex_->objective() + constant_ + future_constant_;
}

std::vector<double> JointWeekLp::level_duals() const {
  std::vector<double> d(model_.num_nodes(), 0.0);
  for (int n = 0; n < model_.num_nodes(); ++n) {
    if (x0_[n] >= 0) d[n] = simplex_->reduced_cost(x0_[n]);
  }
  return d;
}

JointWeekSolution JointWeekLp::solution() const {
  const lp::DenseSimplex& s = *simplex_;
  const int nn = model_.num_nodes();
  const int hours = model_.hours();
  JointWeekSolution out;
  out.node_flow.assign(hours, std::vector<double>(nn));
  out.thermal.assign(hours, std::vector<double>(nn));
  out.ens.assign(hours, std::vector<double>(nn));
  out.arc_flow.assign(hours, std::vector<double>(model_.num_arcs()));
  for (int n = 0; n < nn; ++n) {
    const Node& nd = model_.nodes()[n];
    for (int h = 0; h < hours; ++h) {
      const NodeHour& c = cols_[n][h];
      for (std::size_t k = 0; k < c.thermal.size(); ++k) {
        const double q = s.value(c.thermal[k]);
        out.thermal[h][n] += q;
        out.thermal_cost += nd.clusters[k].marginal_cost * q;
      }
      out.ens[h][n] = s.value(c.ens);
      out.ens_energy += out.ens[h][n];
      out.ens_cost += nd.ens_penalty * out.ens[h][n];
      double spilled = s.value(c.curtail);
      if (c.spill >= 0) spilled += s.value(c.spill);
      out.spill_cost += nd.spill_penalty * spilled;
      out.node_flow[h][n] = s.value(c.flow);
    }
    out.end_levels.push_back(nd.has_storage() ? s.value(cols_[n].back().level) : 0.0);
  }
  out.transport_cost = constant_;
  for (int a = 0; a < model_.num_arcs(); ++a) {
    const Arc& arc = model_.arcs()[a];
    for (int h = 0; h < hours; ++h) {
      double f = arc.flow_min;
      for (int k : segs_[a][h]) {
        const double v = s.value(k);
        f += v;
        out.transport_cost += p_.cost()[k] * v;
      }
      out.arc_flow[h][a] = f;
    }
  }
  out.future = future_constant_;
  for (int j = first_future_col_; j < p_.num_columns(); ++j) out.future += p_.cost()[j] * s.value(j);
  out.objective = out.operational() + out.future;
  out.level_duals = level_duals();
  return out;
}

}  // namespace gdadp
