#include "gdadp/reference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "gdadp/parallel.hpp"

namespace gdadp {

namespace {
std::vector<double> with_extras(std::vector<double> g, double capacity, std::initializer_list<double> extra) {
  for (double x : extra) g.push_back(std::clamp(x, 0.0, capacity));
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(), [&](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + capacity); }),
          g.end());
  return g;
}
}  // namespace

std::vector<std::vector<double>> reference_grids(const SystemModel& model, int points,
                                                 const std::vector<double>& initial_levels) {
  std::vector<std::vector<double>> out;
  for (int n = 0; n < model.num_nodes(); ++n) {
    const Node& nd = model.nodes()[n];
    if (!nd.has_storage()) {
      out.push_back({0.0});
      continue;
    }
    out.push_back(with_extras(uniform_grid(nd.capacity(), points), nd.capacity(), {initial_levels[n], nd.target()}));
  }
  return out;
}

std::vector<std::vector<double>> integer_grids(const SystemModel& model, const std::vector<double>& initial_levels) {
  std::vector<std::vector<double>> out;
  for (int n = 0; n < model.num_nodes(); ++n) {
    const Node& nd = model.nodes()[n];
    if (!nd.has_storage()) {
      out.push_back({0.0});
      continue;
    }
    std::vector<double> g;
    for (int k = 0; k <= static_cast<int>(std::floor(nd.capacity())); ++k) g.push_back(k);
    out.push_back(with_extras(std::move(g), nd.capacity(), {nd.capacity(), initial_levels[n], nd.target()}));
  }
  return out;
}

ExactDP exact_global_dp(const SystemModel& model, const ScenarioSet& scenarios,
                        const std::vector<std::vector<double>>& grids, const std::vector<double>& initial_levels,
                        const ExactDpOptions& options) {
  if (static_cast<int>(grids.size()) != model.num_nodes()) throw ShapeError("exact_global_dp: one grid per node");
  ExactDP dp{ProductGrid(grids), {}, initial_levels, 0.0, 0};
  const int weeks = model.weeks();
  const int chronicles = static_cast<int>(scenarios.size());
  const long needed = static_cast<long>(dp.grid.size()) * weeks * chronicles;
  if (needed > options.max_stage_solves) {
    throw ReferenceError("exact_global_dp: " + std::to_string(needed) + " stage solves exceed the guard of " +
                         std::to_string(options.max_stage_solves));
  }
  dp.tables.assign(weeks + 1, std::vector<double>(dp.grid.size(), 0.0));
  for (std::size_t i = 0; i < dp.grid.size(); ++i) dp.tables[weeks][i] = total_final_cost(model, dp.grid.point(i));

  const int threads = resolve_threads(options.threads);
  for (int s = weeks - 1; s >= 0; --s) {
    const ExactDpCostToGo next(model, dp.grid, dp.tables);
    std::vector<std::vector<double>> per(chronicles, std::vector<double>(dp.grid.size()));
    parallel_for(chronicles, threads, [&](int c) {
      std::unique_ptr<JointWeekLp> lp;
      for (std::size_t i = 0; i < dp.grid.size(); ++i) {
        const std::vector<double> x = dp.grid.point(i);
        if (!lp) lp = std::make_unique<JointWeekLp>(model, scenarios.week(c, s), x, &next, s, options.joint);
        else lp->set_levels(x);
        per[c][i] = lp->solve();
      }
    });
    for (std::size_t i = 0; i < dp.grid.size(); ++i) {
      double v = 0.0;
      for (int c = 0; c < chronicles; ++c) v += per[c][i];
      dp.tables[s][i] = v / chronicles;
    }
    dp.stage_solves += static_cast<long>(dp.grid.size()) * chronicles;
  }
  const long at = dp.grid.find(initial_levels);
  if (at >= 0) {
    dp.optimum = dp.tables[0][at];
  } else {
    const ExactDpCostToGo ctg = dp.cost_to_go(model);
    dp.optimum = ctg.evaluate(0, initial_levels);
  }
  return dp;
}

ChronicleRecord rollout_exact_policy(const SystemModel& model, const ExactDP& exact, const YearChronicle& chronicle,
                                     const JointOptions& joint) {
  const ExactDpCostToGo ctg = exact.cost_to_go(model);
  SimulationOptions opt;
  opt.joint = joint;
  return simulate_chronicle(model, ctg, chronicle, exact.initial_levels, opt);
}

SddpResult sddp_solve(const SystemModel& model, const ScenarioSet& scenarios, const std::vector<double>& initial_levels,
                      const SddpConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const int weeks = model.weeks();
  const int nn = model.num_nodes();
  const int chronicles = static_cast<int>(scenarios.size());
  SddpResult res{SddpCostToGo(model, weeks), {}, 0, ""};
  std::mt19937_64 rng(config.seed);

  auto stage = [&](int s, int c, const std::vector<double>& x, std::vector<double>* duals) {
    JointWeekLp lp(model, scenarios.week(c, s), x, &res.cost_to_go, s, config.joint);
    const double v = lp.solve();
    if (!std::isfinite(v)) throw ReferenceError("sddp: non-finite stage value");
    if (duals) *duals = lp.level_duals();
    return v;
  };

  int stalled = 0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    // Forward pass: states at the start of weeks 1..|W|-1 along sampled paths.
    std::vector<std::vector<std::vector<double>>> states(config.samples);
    for (int k = 0; k < config.samples; ++k) {
      const std::vector<int> draw = sample_product_indices(rng, scenarios.size(), weeks);
      std::vector<double> x = initial_levels;
      for (int s = 0; s < weeks; ++s) {
        states[k].push_back(x);
        JointWeekLp lp(model, scenarios.week(draw[s], s), x, &res.cost_to_go, s, config.joint);
        lp.solve();
        const JointWeekSolution w = lp.solution();
        for (int n = 0; n < nn; ++n) {
          x[n] = model.nodes()[n].has_storage() ? std::clamp(w.end_levels[n], 0.0, model.nodes()[n].capacity()) : 0.0;
        }
      }
    }
    // Backward pass: one averaged cut per week and trial state.
    for (int s = weeks - 1; s >= 1; --s) {
      for (int k = 0; k < config.samples; ++k) {
        const std::vector<double>& x = states[k][s];
        double v = 0.0;
        std::vector<double> g(nn, 0.0), d;
        for (int c = 0; c < chronicles; ++c) {
          v += stage(s, c, x, &d) / chronicles;
          for (int n = 0; n < nn; ++n) g[n] += d[n] / chronicles;
        }
        MultiCut cut{v, g};
        for (int n = 0; n < nn; ++n) cut.intercept -= g[n] * x[n];
        res.cost_to_go.add_cut(s, std::move(cut));
      }
    }
    double lb = 0.0;
    for (int c = 0; c < chronicles; ++c) lb += stage(0, c, initial_levels, nullptr) / chronicles;
    const double prev = res.lower_bounds.empty() ? -lp::kInf : res.lower_bounds.back();
    res.lower_bounds.push_back(lb);
    res.iterations = it;
    stalled = lb - prev < config.tolerance ? stalled + 1 : 0;
    if (stalled >= config.stall_iterations) {
      res.stop_reason = "improvement below tolerance";
      return res;
    }
    if (config.time_limit_seconds > 0.0 &&
        std::chrono::duration<double>(clock::now() - t0).count() >= config.time_limit_seconds) {
      res.stop_reason = "time limit";
      return res;
    }
  }
  res.stop_reason = "iteration limit";
  return res;
}

}  // namespace gdadp
