#include "gdadp/nodal_sdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "gdadp/lp.hpp"
#include "gdadp/parallel.hpp"

namespace gdadp {

double final_cost(const Node& node, double level) {
  return node.final_penalty_rate * std::max(0.0, node.target() - level);
}

std::vector<Cut> final_cost_cuts(const Node& node) {
  return {Cut{0.0, 0.0}, Cut{node.final_penalty_rate * node.target(), -node.final_penalty_rate}};
}

double evaluate_value(std::span<const Cut> cuts, double level) {
  if (cuts.empty()) throw EmptyCutsError("value function has no cuts");
  double v = -lp::kInf;
  for (const Cut& c : cuts) v = std::max(v, c(level));
  return v;
}

double evaluate_value(const NodeValueFunction& vf, int week, double level) {
  if (week < 0 || week >= static_cast<int>(vf.weeks.size())) throw ShapeError("evaluate_value: week out of range");
  return evaluate_value(vf.weeks[week].cuts, level);
}

std::vector<std::pair<double, double>> cut_envelope(std::span<const Cut> cuts, double lo, double hi) {
  if (cuts.empty()) throw EmptyCutsError("value function has no cuts");
  const double eps = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  // Active cut at lo: highest value, then steepest.
  std::size_t cur = 0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double vi = cuts[i](lo), vc = cuts[cur](lo);
    if (vi > vc || (vi == vc && cuts[i].slope > cuts[cur].slope)) cur = i;
  }
  std::vector<std::pair<double, double>> out{{lo, evaluate_value(cuts, lo)}};
  double x = lo;
  while (x < hi - eps) {
    // Next active cut: the steeper one crossing the current cut first.
    double best_x = hi;
    std::size_t next = cur;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      if (cuts[i].slope <= cuts[cur].slope) continue;
      const double xi = (cuts[cur].intercept - cuts[i].intercept) / (cuts[i].slope - cuts[cur].slope);
      if (xi < best_x || (xi == best_x && next != cur && cuts[i].slope > cuts[next].slope)) {
        best_x = std::max(xi, x);
        next = i;
      }
    }
    if (next == cur) break;
    if (best_x > x + eps && best_x < hi - eps) out.emplace_back(best_x, evaluate_value(cuts, best_x));
    x = best_x;
    cur = next;
  }
  if (hi > lo + eps) out.emplace_back(hi, evaluate_value(cuts, hi));
  return out;
}

double append_envelope(lp::Problem& lp, int level_col, std::span<const Cut> cuts, double lo, double hi,
                       std::vector<int>* segment_cols) {
  const auto env = cut_envelope(cuts, lo, hi);
  std::vector<lp::Entry> row{{level_col, 1.0}};
  for (std::size_t k = 0; k + 1 < env.size(); ++k) {
    const double w = env[k + 1].first - env[k].first;
    const int col = lp.add_column((env[k + 1].second - env[k].second) / w, 0.0, w);
    row.push_back({col, -1.0});
    if (segment_cols) segment_cols->push_back(col);
  }
  lp.add_row(lo, lo, std::move(row));
  return env.front().second;
}

std::pair<double, double> nodal_flow_box(const SystemModel& model, int node, const NodalOptions& options) {
  if (options.flow_box) return *options.flow_box;
  return model.node_flow_box(node);
}

namespace {

// One node, one week, one chronicle. Kept alive across storage levels so that
// successive solves warm start from the previous basis.
class NodalWeekLp {
 public:
  NodalWeekLp(const SystemModel& model, int node, const NodeWeekSeries& ser, std::span<const double> prices,
              std::span<const Cut> next_cuts, std::pair<double, double> box, double level)
      : node_(model.nodes()[node]), hours_(model.hours()) {
    const Node& nd = node_;
    const bool st = nd.has_storage();
    const int k = static_cast<int>(nd.clusters.size());
    if (st) x0_ = p_.add_column(0.0, level, level);
    for (int h = 0; h < hours_; ++h) {
      Hour hc;
      std::vector<lp::Entry> bal;
      for (int c = 0; c < k; ++c) {
        hc.thermal.push_back(p_.add_column(nd.clusters[c].marginal_cost, 0.0,
                                           ser.availability[h] * nd.clusters[c].capacity));
        bal.push_back({hc.thermal.back(), 1.0});
      }
      hc.ens = p_.add_column(nd.ens_penalty, 0.0, lp::kInf);
      hc.curtail = p_.add_column(nd.spill_penalty, 0.0, lp::kInf);
      hc.flow = p_.add_column(prices[h], box.first, box.second);
      bal.push_back({hc.ens, 1.0});
      bal.push_back({hc.curtail, -1.0});
      bal.push_back({hc.flow, 1.0});
      if (st) {
        const Storage& s = *nd.storage;
        hc.turbine = p_.add_column(0.0, 0.0, s.max_turbine);
        hc.pump = p_.add_column(0.0, 0.0, s.max_pump);
        hc.spill = p_.add_column(nd.spill_penalty, 0.0, lp::kInf);
        hc.level = p_.add_column(0.0, 0.0, s.capacity);
        bal.push_back({hc.turbine, 1.0});
        bal.push_back({hc.pump, -1.0});
        const int prev = h == 0 ? x0_ : hours_v_[h - 1].level;
        p_.add_row(ser.inflow[h], ser.inflow[h],
                   {{hc.level, 1.0}, {prev, -1.0}, {hc.turbine, 1.0}, {hc.pump, -s.pump_efficiency},
                    {hc.spill, 1.0}});
        hc.dyn_row = p_.num_rows() - 1;
      }
      p_.add_row(ser.net_demand[h], ser.net_demand[h], std::move(bal));
      hc.bal_row = p_.num_rows() - 1;
      hours_v_.push_back(std::move(hc));
    }
    if (st) {
      future_const_ = append_envelope(p_, hours_v_.back().level, next_cuts, 0.0, nd.storage->capacity, &segments_);
    } else {
      future_const_ = evaluate_value(next_cuts, 0.0);
    }
    simplex_ = std::make_unique<lp::DenseSimplex>(p_);
  }

  void set_level(double level) {
    if (x0_ >= 0) simplex_->set_column_bounds(x0_, level, level);
  }

  void solve() {
    const lp::Status st = simplex_->solve();
    if (st != lp::Status::Optimal) {
      throw lp::SolveError(st, "nodal subproblem for node '" + node_.id + "': " + lp::to_string(st));
    }
    ++solves_;
  }

  double objective() const { return simplex_->objective() + future_const_; }
  double slope() const { return x0_ >= 0 ? simplex_->reduced_cost(x0_) : 0.0; }
  double flow(int h) const { return simplex_->value(hours_v_[h].flow); }
  double next_level() const { return x0_ >= 0 ? simplex_->value(hours_v_.back().level) : 0.0; }
  long solves() const { return solves_; }

  WeeklySolution detail(std::span<const double> prices) const {
    WeeklySolution w;
    const lp::DenseSimplex& s = *simplex_;
    const Node& nd = node_;
    for (int h = 0; h < hours_; ++h) {
      const Hour& hc = hours_v_[h];
      std::vector<double> th;
      for (std::size_t c = 0; c < hc.thermal.size(); ++c) {
        th.push_back(s.value(hc.thermal[c]));
        w.thermal_cost += nd.clusters[c].marginal_cost * th.back();
      }
      w.thermal.push_back(std::move(th));
      w.ens.push_back(s.value(hc.ens));
      w.curtail.push_back(s.value(hc.curtail));
      w.flow.push_back(s.value(hc.flow));
      w.turbine.push_back(hc.turbine >= 0 ? s.value(hc.turbine) : 0.0);
      w.pump.push_back(hc.pump >= 0 ? s.value(hc.pump) : 0.0);
      w.spill.push_back(hc.spill >= 0 ? s.value(hc.spill) : 0.0);
      w.level.push_back(hc.level >= 0 ? s.value(hc.level) : 0.0);
      w.ens_cost += nd.ens_penalty * w.ens.back();
      w.spill_cost += nd.spill_penalty * (w.curtail.back() + w.spill.back());
      w.price_term += prices[h] * w.flow.back();
    }
    w.operational = w.thermal_cost + w.ens_cost + w.spill_cost;
    w.future = future_const_;
    for (int c : segments_) w.future += p_.cost()[c] * s.value(c);
    w.objective = objective();
    w.next_level = next_level();
    w.level_dual = slope();
    return w;
  }

 private:
  struct Hour {
    std::vector<int> thermal;
    int ens = -1, curtail = -1, flow = -1, turbine = -1, pump = -1, spill = -1, level = -1;
    int dyn_row = -1, bal_row = -1;
  };
  const Node& node_;
  int hours_;
  lp::Problem p_;
  std::vector<Hour> hours_v_;
  int x0_ = -1;
  std::vector<int> segments_;
  double future_const_ = 0.0;
  std::unique_ptr<lp::DenseSimplex> simplex_;
  long solves_ = 0;
};

struct PointEval {
  double value = 0.0;
  double slope = 0.0;
  std::vector<double> block_flows;
  std::vector<double> next_levels;
};

void add_cut(std::vector<Cut>& cuts, const Cut& c) {
  for (const Cut& k : cuts) {
    if (std::abs(k.slope - c.slope) <= 1e-10 * (1.0 + std::abs(c.slope)) &&
        std::abs(k.intercept - c.intercept) <= 1e-10 * (1.0 + std::abs(c.intercept))) {
      return;
    }
  }
  cuts.push_back(c);
}

}  // namespace

WeeklySolution solve_weekly_subproblem(const SystemModel& model, int node, double level,
                                       const NodeWeekSeries& chronicle, std::span<const double> hour_prices,
                                       std::span<const Cut> next_cuts, const NodalOptions& options) {
  if (static_cast<int>(hour_prices.size()) != model.hours()) {
    throw ShapeError("solve_weekly_subproblem: expected " + std::to_string(model.hours()) + " hourly prices");
  }
  if (next_cuts.empty()) throw EmptyCutsError("solve_weekly_subproblem: next value function has no cuts");
  NodalWeekLp lp(model, node, chronicle, hour_prices, next_cuts, nodal_flow_box(model, node, options), level);
  lp.solve();
  return lp.detail(hour_prices);
}

std::vector<double> uniform_grid(double capacity, int points, std::span<const double> extra) {
  std::vector<double> g;
  if (capacity <= 0.0 || points <= 1) {
    g.push_back(0.0);
    if (capacity > 0.0) g.push_back(capacity);
  } else {
    for (int i = 0; i < points; ++i) g.push_back(capacity * i / (points - 1));
    g.back() = capacity;
  }
  for (double x : extra) g.push_back(std::clamp(x, 0.0, std::max(capacity, 0.0)));
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(), [&](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + capacity); }),
          g.end());
  return g;
}

NodeValueFunction backward_recursion(const SystemModel& model, int node, const HourlySeries& price,
                                     const BlockScheme& scheme, const ScenarioSet& training,
                                     const NodalOptions& options) {
  const Node& nd = model.nodes()[node];
  const int weeks = model.weeks();
  const int hours = model.hours();
  const int blocks = scheme.blocks_per_week();
  const int chronicles = static_cast<int>(training.size());
  if (price.hours != hours || price.weeks != weeks || price.nodes != model.num_nodes()) {
    throw ShapeError("backward_recursion: price shape does not match the model");
  }
  if (training.weeks() != weeks) throw ShapeError("backward_recursion: scenario horizon does not match the model");
  const auto box = nodal_flow_box(model, node, options);

  NodeValueFunction vf;
  vf.node = node;
  vf.blocks_per_week = blocks;
  vf.weeks.resize(weeks + 1);
  {
    WeekValue& t = vf.weeks[weeks];
    t.cuts = final_cost_cuts(nd);
    const double target = std::clamp(nd.target(), 0.0, nd.capacity());
    t.grid = nd.has_storage() ? uniform_grid(nd.capacity(), 2, std::vector<double>{target}) : std::vector<double>{0.0};
    for (double x : t.grid) {
      t.values.push_back(final_cost(nd, x));
      t.slopes.push_back(x < target ? -nd.final_penalty_rate : 0.0);
      t.gradients.emplace_back();
    }
  }

  for (int s = weeks - 1; s >= 0; --s) {
    const WeekValue& next = vf.weeks[s + 1];
    std::span<const double> prices(price.week(node, s), hours);
    std::vector<std::unique_ptr<NodalWeekLp>> lps(chronicles);
    std::vector<double> extra = options.extra_levels;
    if (s == 0) extra.push_back(options.initial_level.value_or(nd.initial_level()));
    const std::vector<double> base =
        nd.has_storage() ? uniform_grid(nd.capacity(), options.grid_points, extra) : std::vector<double>{0.0};

    auto evaluate = [&](double x) {
      PointEval e;
      e.block_flows.assign(blocks, 0.0);
      e.next_levels.resize(chronicles);
      for (int c = 0; c < chronicles; ++c) {
        if (!lps[c]) {
          lps[c] = std::make_unique<NodalWeekLp>(model, node, training.week(c, s).nodes[node], prices, next.cuts, box, x);
        } else {
          lps[c]->set_level(x);
        }
        lps[c]->solve();
        e.value += lps[c]->objective();
        e.slope += lps[c]->slope();
        for (int h = 0; h < hours; ++h) e.block_flows[scheme.block_of(h)] += lps[c]->flow(h);
        e.next_levels[c] = lps[c]->next_level();
      }
      const double inv = 1.0 / chronicles;
      e.value *= inv;
      e.slope *= inv;
      for (double& f : e.block_flows) f *= inv;
      return e;
    };

    std::map<double, PointEval> pts;
    for (double x : base) pts.emplace(x, evaluate(x));

    if (options.refine && nd.has_storage() && pts.size() > 1) {
      const double cap = nd.capacity();
      auto tol = [&](double v) { return options.refine_tolerance * std::max(1.0, std::abs(v)); };
      std::vector<std::pair<double, double>> work;
      for (auto it = pts.begin(); std::next(it) != pts.end(); ++it) work.emplace_back(it->first, std::next(it)->first);
      std::reverse(work.begin(), work.end());
      while (!work.empty()) {
        const auto [a, b] = work.back();
        work.pop_back();
        const PointEval& ea = pts.at(a);
        const PointEval& eb = pts.at(b);
        const Cut ca{ea.value - ea.slope * a, ea.slope};
        const Cut cb{eb.value - eb.slope * b, eb.slope};
        if (std::abs(ca(b) - eb.value) <= tol(eb.value) || std::abs(cb(a) - ea.value) <= tol(ea.value)) continue;
        const double denom = ca.slope - cb.slope;
        if (std::abs(denom) <= 1e-14 * (1.0 + std::abs(ca.slope))) continue;
        const double xm = (cb.intercept - ca.intercept) / denom;
        const double eps = 1e-12 * std::max(1.0, cap);
        if (!(xm > a + eps && xm < b - eps)) continue;
        if (static_cast<int>(pts.size()) >= options.max_points_per_week) {
          vf.exact = false;
          break;
        }
        const PointEval em = evaluate(xm);
        const double model_value = std::max(ca(xm), cb(xm));
        const bool verified = em.value - model_value <= tol(em.value);
        pts.emplace(xm, em);
        if (!verified) {
          work.emplace_back(xm, b);
          work.emplace_back(a, xm);
        }
      }
    } else if (nd.has_storage() && !options.refine) {
      vf.exact = false;
    }

    WeekValue& wk = vf.weeks[s];
    for (const auto& [x, e] : pts) {
      wk.grid.push_back(x);
      wk.values.push_back(e.value);
      wk.slopes.push_back(e.slope);
      wk.block_flows.push_back(e.block_flows);
      wk.next_levels.push_back(e.next_levels);
      add_cut(wk.cuts, Cut{e.value - e.slope * x, e.slope});
    }
    for (const auto& lp : lps) vf.lp_solves += lp ? lp->solves() : 0;
  }
  return vf;
}

namespace {

// Segment index and weight for linear interpolation on a sorted grid.
std::pair<int, double> locate(const std::vector<double>& grid, double level, long* clamped) {
  const int n = static_cast<int>(grid.size());
  if (n == 1) return {0, 0.0};
  const double span = std::max(1.0, grid.back() - grid.front());
  if (level < grid.front() || level > grid.back()) {
    if ((level < grid.front() - 1e-9 * span || level > grid.back() + 1e-9 * span) && clamped) ++*clamped;
    level = std::clamp(level, grid.front(), grid.back());
  }
  int i = static_cast<int>(std::upper_bound(grid.begin(), grid.end(), level) - grid.begin()) - 1;
  i = std::clamp(i, 0, n - 2);
  const double t = (level - grid[i]) / (grid[i + 1] - grid[i]);
  return {i, std::clamp(t, 0.0, 1.0)};
}

}  // namespace

double interpolate_value(const NodeValueFunction& vf, int week, double level) {
  const WeekValue& w = vf.weeks.at(week);
  const auto [i, t] = locate(w.grid, level, nullptr);
  if (w.grid.size() == 1) return w.values[0];
  return (1.0 - t) * w.values[i] + t * w.values[i + 1];
}

std::vector<double> interpolate_gradient(const NodeValueFunction& vf, int week, double level, long* clamped) {
  const WeekValue& w = vf.weeks.at(week);
  if (w.gradients.size() != w.grid.size()) throw ShapeError("interpolate_gradient: gradients not computed");
  const auto [i, t] = locate(w.grid, level, clamped);
  if (w.grid.size() == 1) return w.gradients[0];
  std::vector<double> g(w.gradients[i].size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = (1.0 - t) * w.gradients[i][k] + t * w.gradients[i + 1][k];
  return g;
}

void gradient_recursion(NodeValueFunction& vf) {
  const int weeks = vf.num_weeks();
  const int blocks = vf.blocks_per_week;
  vf.weeks[weeks].gradients.assign(vf.weeks[weeks].grid.size(), {});
  for (int s = weeks - 1; s >= 0; --s) {
    WeekValue& w = vf.weeks[s];
    const std::size_t later = static_cast<std::size_t>(weeks - s - 1) * blocks;
    w.gradients.assign(w.grid.size(), {});
    for (std::size_t i = 0; i < w.grid.size(); ++i) {
      std::vector<double> g(blocks + later, 0.0);
      std::copy(w.block_flows[i].begin(), w.block_flows[i].end(), g.begin());
      const auto& nexts = w.next_levels[i];
      const double inv = 1.0 / static_cast<double>(nexts.size());
      for (double x : nexts) {
        const std::vector<double> gn = interpolate_gradient(vf, s + 1, x, &vf.clamped);
        for (std::size_t k = 0; k < later; ++k) g[blocks + k] += inv * gn[k];
      }
      w.gradients[i] = std::move(g);
    }
  }
}

}  // namespace gdadp
