#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gdadp/nodal_sdp.hpp"

using namespace gdadp;

namespace {

Node thermal_only(double cap, double cost) {
  Node n;
  n.id = "n";
  n.clusters = {{cap, cost}};
  return n;
}

ScenarioSet single(const SystemModel& m, std::vector<std::vector<double>> demand, std::vector<std::vector<double>> inflow = {},
                   double availability = 1.0) {
  YearChronicle y{"only", {}};
  for (int s = 0; s < m.weeks(); ++s) {
    WeeklyChronicle w;
    NodeWeekSeries ser;
    ser.net_demand = demand[s];
    ser.availability.assign(m.hours(), availability);
    ser.inflow = inflow.empty() ? std::vector<double>(m.hours(), 0.0) : inflow[s];
    w.nodes.push_back(ser);
    y.weeks.push_back(w);
  }
  return ScenarioSet({y}, ScenarioRole::Training);
}

// Cheapest way to serve a residual demand R with the node's clusters, ENS and curtailment.
double dispatch(const Node& n, double r, double availability) {
  if (r < 0) return -r * n.spill_penalty;
  auto cl = n.clusters;
  std::sort(cl.begin(), cl.end(), [](auto& a, auto& b) { return a.marginal_cost < b.marginal_cost; });
  double cost = 0.0;
  for (const auto& c : cl) {
    const double q = std::min(r, availability * c.capacity);
    cost += q * c.marginal_cost;
    r -= q;
  }
  return cost + r * n.ens_penalty;
}

// Exhaustive dynamic programming over integer hourly levels and integer controls.
double lattice_oracle(const SystemModel& m, const NodeWeekSeries* weeks, const std::vector<std::vector<double>>& price,
                      double flo, double fhi) {
  const Node& n = m.nodes()[0];
  const Storage& st = *n.storage;
  const int cap = static_cast<int>(st.capacity);
  std::vector<double> v(cap + 1);
  for (int x = 0; x <= cap; ++x) v[x] = final_cost(n, x);
  for (int s = m.weeks() - 1; s >= 0; --s) {
    for (int h = m.hours() - 1; h >= 0; --h) {
      std::vector<double> prev(cap + 1, 1e300);
      for (int x = 0; x <= cap; ++x) {
        for (int y = 0; y <= cap; ++y) {
          const double d = x + weeks[s].inflow[h] - y;  // turbine - pump + spill
          for (int tu = 0; tu <= st.max_turbine; ++tu)
            for (int pu = 0; pu <= st.max_pump; ++pu) {
              const double spill = d - tu + pu;
              if (spill < 0) continue;
              for (int f = static_cast<int>(flo); f <= static_cast<int>(fhi); ++f) {
                const double c = n.spill_penalty * spill + price[s][h] * f +
                                 dispatch(n, weeks[s].net_demand[h] - tu + pu - f, weeks[s].availability[h]) + v[y];
                prev[x] = std::min(prev[x], c);
              }
            }
        }
      }
      v = prev;
    }
  }
  return v[static_cast<int>(st.initial_level)];
}

}  // namespace

TEST_CASE("nodal: final cost") {
  Node n = fixtures::storage_node("a", 100, 50, 10);
  CHECK(final_cost(n, 50) == 0.0);
  CHECK(final_cost(n, 40) == 1500.0);
  CHECK(final_cost(n, 60) == 0.0);
  CHECK(evaluate_value(final_cost_cuts(n), 30) == 3000.0);
  for (double x = 0; x <= 100; x += 2.5) CHECK(evaluate_value(final_cost_cuts(n), x) == final_cost(n, x));
}

TEST_CASE("nodal: evaluate cuts") {
  std::vector<Cut> a{{0, 0}};
  CHECK(evaluate_value(a, 7) == 0.0);
  std::vector<Cut> b{{10, -1}, {0, 0}};
  CHECK(evaluate_value(b, 5) == 5.0);
  CHECK_THROWS_AS(evaluate_value(std::vector<Cut>{}, 1), EmptyCutsError);
}

TEST_CASE("nodal: single-hour dispatch examples") {
  const SystemModel m({1, 1}, {thermal_only(10, 10)}, {});
  NodalOptions opt;
  opt.flow_box = std::pair{0.0, 100.0};
  const std::vector<Cut> zero{{0, 0}};
  const std::vector<double> price{1000};
  NodeWeekSeries ser{{5}, {1}, {0}};
  WeeklySolution w = solve_weekly_subproblem(m, 0, 0, ser, price, zero, opt);
  CHECK(w.thermal[0][0] == doctest::Approx(5));
  CHECK(w.flow[0] == doctest::Approx(0));
  CHECK(w.objective == doctest::Approx(50));
  // brute force on a 0.5 MW dispatch grid
  double best = 1e300;
  for (double t = 0; t <= 10; t += 0.5)
    for (double f = 0; f <= 20; f += 0.5) best = std::min(best, 10 * t + 1000 * f + 3000 * std::max(0.0, 5 - t - f) + 1e6 * std::max(0.0, t + f - 5));
  CHECK(best == doctest::Approx(50));

  ser.net_demand = {15};
  w = solve_weekly_subproblem(m, 0, 0, ser, price, zero, opt);
  CHECK(w.thermal[0][0] == doctest::Approx(10));
  CHECK(w.flow[0] == doctest::Approx(5));
  CHECK(w.ens[0] == doctest::Approx(0));
  CHECK(w.objective == doctest::Approx(100 + 5000));

  ser.net_demand = {0};
  const std::vector<double> zp{0};
  w = solve_weekly_subproblem(m, 0, 0, ser, zp, zero, opt);
  CHECK(w.objective == doctest::Approx(0));
  CHECK(w.thermal[0][0] == doctest::Approx(0));
  CHECK(w.ens[0] == doctest::Approx(0));
}

TEST_CASE("nodal: balance and bounds hold in a storage week") {
  const SystemModel m({1, 3}, {fixtures::storage_node("a", 10, 4, 3, 2, 0.8)}, {});
  NodalOptions opt;
  opt.flow_box = std::pair{-2.0, 2.0};
  NodeWeekSeries ser{{3, 14, -2}, {1, 0.5, 1}, {1, 0, 5}};
  const std::vector<double> price{5, 70, -10};
  const WeeklySolution w = solve_weekly_subproblem(m, 0, 4, ser, price, final_cost_cuts(m.nodes()[0]), opt);
  double level = 4;
  for (int h = 0; h < 3; ++h) {
    double th = 0;
    for (double t : w.thermal[h]) th += t;
    CHECK(th + w.turbine[h] - w.pump[h] + w.ens[h] - w.curtail[h] + w.flow[h] == doctest::Approx(ser.net_demand[h]));
    level = hourly_dynamics(m.nodes()[0], level, ser.inflow[h], w.turbine[h], w.pump[h], w.spill[h]);
    CHECK(level == doctest::Approx(w.level[h]));
    CHECK(level >= -1e-9);
    CHECK(level <= 10 + 1e-9);
    CHECK(w.flow[h] >= -2 - 1e-9);
    CHECK(w.flow[h] <= 2 + 1e-9);
  }
  CHECK(w.objective == doctest::Approx(w.operational + w.price_term + w.future));
}

TEST_CASE("nodal: one week equals the expected weekly cost") {
  SystemModel m({1, 2}, {fixtures::storage_node("a", 10, 4, 3)}, {});
  Node n = m.nodes()[0];
  n.final_penalty_rate = 0;
  m = SystemModel({1, 2}, {n}, {});
  const ScenarioSet set = fixtures::random_set(m, 3, 9);
  const HourlySeries price(1, 1, 2);
  NodalOptions opt;
  opt.flow_box = std::pair{0.0, 0.0};
  const NodeValueFunction vf = backward_recursion(m, 0, price, BlockScheme(2, 2), set, opt);
  for (std::size_t i = 0; i < vf.weeks[0].grid.size(); i += 7) {
    double mean = 0;
    for (std::size_t c = 0; c < set.size(); ++c) {
      mean += solve_weekly_subproblem(m, 0, vf.weeks[0].grid[i], set.week(c, 0).nodes[0], std::vector<double>{0, 0},
                                      std::vector<Cut>{{0, 0}}, opt).objective / 3.0;
    }
    CHECK(vf.weeks[0].values[i] == doctest::Approx(mean).epsilon(1e-9));
  }
}

TEST_CASE("nodal: deterministic two-week recursion matches lattice enumeration") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dem(0, 14), inf(0, 4), pr(-50, 100);
  for (int trial = 0; trial < 6; ++trial) {
    Node n = fixtures::storage_node("a", 6, 3, 3, 2);
    n.spill_penalty = trial % 2 ? 0.0 : 5.0;
    const SystemModel m({2, 2}, {n}, {});
    std::vector<std::vector<double>> d(2, std::vector<double>(2)), in = d, price = d;
    for (int s = 0; s < 2; ++s)
      for (int h = 0; h < 2; ++h) {
        d[s][h] = dem(rng);
        in[s][h] = inf(rng);
        price[s][h] = pr(rng);
      }
    const ScenarioSet set = single(m, d, in);
    HourlySeries hp(1, 2, 2);
    for (int s = 0; s < 2; ++s)
      for (int h = 0; h < 2; ++h) hp.at(0, s, h) = price[s][h];
    NodalOptions opt;
    opt.flow_box = std::pair{-2.0, 2.0};
    opt.grid_points = 7;
    const NodeValueFunction vf = backward_recursion(m, 0, hp, BlockScheme(1, 2), set, opt);
    const NodeWeekSeries weeks[2] = {set.week(0, 0).nodes[0], set.week(0, 1).nodes[0]};
    const double brute = lattice_oracle(m, weeks, price, -2, 2);
    CHECK(interpolate_value(vf, 0, 3) == doctest::Approx(brute).epsilon(1e-4));
    CHECK(evaluate_value(vf, 0, 3) == doctest::Approx(brute).epsilon(1e-4));
    CHECK(vf.exact);
  }
}

TEST_CASE("nodal: cut model properties") {
  const SystemModel m({3, 2}, {fixtures::storage_node("a", 20, 10, 6, 3), fixtures::plain_node("b")},
                      {fixtures::arc("ab", "a", "b", 4)});
  const ScenarioSet set = fixtures::random_set(m, 3, 5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-40, 120);
  HourlySeries hp(2, 3, 2);
  for (double& v : hp.data) v = u(rng);
  const Node& n = m.nodes()[0];
  const double bound = n.ens_penalty + n.final_penalty_rate;
  NodalOptions opt;
  const NodeValueFunction vf = backward_recursion(m, 0, hp, BlockScheme(1, 2), set, opt);
  CHECK(vf.exact);
  for (int s = 0; s < 3; ++s) {
    const WeekValue& w = vf.weeks[s];
    for (std::size_t i = 0; i < w.grid.size(); ++i) {
      const double model_value = evaluate_value(vf, s, w.grid[i]);
      CHECK(model_value <= w.values[i] + 1e-6);
      CHECK(model_value == doctest::Approx(w.values[i]).epsilon(1e-8));
    }
    for (const Cut& c : w.cuts) {
      CHECK(c.slope >= -bound - 1e-9);
      CHECK(c.slope <= bound + 1e-9);
    }
    // discrete convexity of the sampled values
    for (std::size_t i = 1; i + 1 < w.grid.size(); ++i) {
      const double l = (w.values[i] - w.values[i - 1]) / (w.grid[i] - w.grid[i - 1]);
      const double r = (w.values[i + 1] - w.values[i]) / (w.grid[i + 1] - w.grid[i]);
      CHECK(l <= r + 1e-6);
    }
  }
  // Adding grid points never lowers the cut model.
  NodalOptions coarse, fine;
  coarse.refine = fine.refine = false;
  coarse.grid_points = 5;
  fine.grid_points = 9;
  const NodeValueFunction a = backward_recursion(m, 0, hp, BlockScheme(1, 2), set, coarse);
  const NodeValueFunction b = backward_recursion(m, 0, hp, BlockScheme(1, 2), set, fine);
  for (double x = 0; x <= 20; x += 0.25) CHECK(evaluate_value(b, 0, x) >= evaluate_value(a, 0, x) - 1e-7);
  // The refined model is exact, so it dominates both.
  for (double x = 0; x <= 20; x += 0.25) CHECK(evaluate_value(vf, 0, x) >= evaluate_value(b, 0, x) - 1e-7);
}

TEST_CASE("nodal: gradients") {
  SUBCASE("self-sufficient node has a zero gradient") {
    const SystemModel m({2, 2}, {fixtures::storage_node("a", 20, 10, 6)}, {});
    const ScenarioSet set = fixtures::random_set(m, 2, 4);
    HourlySeries hp(1, 2, 2, 50.0);
    NodeValueFunction vf = backward_recursion(m, 0, hp, BlockScheme(1, 2), set);
    gradient_recursion(vf);
    for (const auto& w : vf.weeks)
      for (const auto& g : w.gradients)
        for (double v : g) CHECK(v == 0.0);
  }
  SUBCASE("single block gradient is the summed import") {
    Node n = thermal_only(10, 100);
    const SystemModel m({1, 2}, {n}, {});
    const ScenarioSet set = single(m, {{2, 3}});
    NodalOptions opt;
    opt.flow_box = std::pair{0.0, 10.0};
    NodeValueFunction vf = backward_recursion(m, 0, HourlySeries(1, 1, 2), BlockScheme(2, 2), set, opt);
    gradient_recursion(vf);
    REQUIRE(vf.weeks[0].gradients.size() == 1);
    REQUIRE(vf.weeks[0].gradients[0].size() == 1);
    CHECK(vf.weeks[0].gradients[0][0] == doctest::Approx(5.0));
  }
}

TEST_CASE("nodal: supergradient and finite differences of the first-week value") {
  const SystemModel m({3, 2}, {fixtures::storage_node("a", 12, 6, 4, 2), fixtures::plain_node("b")},
                      {fixtures::arc("ab", "a", "b", 3)});
  const ScenarioSet set = fixtures::random_set(m, 2, 17);
  const BlockScheme scheme(1, 2);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-30, 90);
  auto first = [&](const HourlySeries& hp, std::vector<double>* grad) {
    NodeValueFunction vf = backward_recursion(m, 0, hp, scheme, set);
    gradient_recursion(vf);
    if (grad) *grad = interpolate_gradient(vf, 0, 6.0);
    return interpolate_value(vf, 0, 6.0);
  };
  int compared = 0;
  for (int t = 0; t < 10; ++t) {
    HourlySeries p(2, 3, 2), q(2, 3, 2);
    for (double& v : p.data) v = u(rng);
    for (double& v : q.data) v = u(rng);
    std::vector<double> g;
    const double vp = first(p, &g);
    const double vq = first(q, nullptr);
    double lin = vp;
    for (int k = 0; k < 6; ++k) lin += g[k] * (q.at(0, k / 2, k % 2) - p.at(0, k / 2, k % 2));
    CHECK(vq <= lin + 1e-6 * std::max(1.0, std::abs(vp)));
    for (int k = 0; k < 6; ++k) {
      const double eps = 1e-3;
      HourlySeries a = p, b = p;
      a.at(0, k / 2, k % 2) += eps;
      b.at(0, k / 2, k % 2) -= eps;
      const double va = first(a, nullptr), vb = first(b, nullptr);
      const double right = (va - vp) / eps, left = (vp - vb) / eps;
      if (std::abs(right - left) > 1e-3 * std::max(1.0, std::abs(right))) continue;
      ++compared;
      CHECK(std::abs((va - vb) / (2 * eps) - g[k]) <= 1e-3 * std::max(1.0, std::abs(g[k])));
    }
  }
  CHECK(compared > 20);
}

TEST_CASE("nodal: uniform price increase with forced import raises the value") {
  Node n = thermal_only(2, 10);
  const SystemModel m({2, 2}, {n}, {});
  const ScenarioSet set = single(m, {{8, 9}, {7, 6}});
  NodalOptions opt;
  opt.flow_box = std::pair{0.0, 20.0};
  double prev = -1e300;
  for (double delta : {0.0, 10.0, 50.0, 200.0}) {
    const NodeValueFunction vf = backward_recursion(m, 0, HourlySeries(1, 2, 2, 100.0 + delta), BlockScheme(1, 2), set, opt);
    const double v = interpolate_value(vf, 0, 0);
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
}
