#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gdadp/price.hpp"
#include "gdadp/transport.hpp"

using namespace gdadp;

namespace {

double grid_min(double gamma, double lo, double hi, double r, double step) {
  double best = std::min(transport_term(gamma, lo, r), transport_term(gamma, hi, r));
  const long n = static_cast<long>(std::floor((hi - lo) / step));
  for (long i = 0; i <= n; ++i) best = std::min(best, transport_term(gamma, lo + i * step, r));
  return best;
}

SystemModel parallel_pair(double cap1, double cap2) {
  return SystemModel({1, 1}, {fixtures::plain_node("1"), fixtures::plain_node("2")},
                     {Arc{"x", "1", "2", -cap1, cap1, 1.0}, Arc{"y", "1", "2", -cap2, cap2, 1.0}});
}

}  // namespace

TEST_CASE("transport: one-dimensional examples") {
  CHECK(transport_flow(1.0, -10, 10, 0.0) == 0.0);
  CHECK(transport_flow(1.0, -10, 10, 4.0) == 2.0);
  CHECK(transport_term(1.0, 2.0, 4.0) == -4.0);
  CHECK(grid_min(1.0, -10, 10, 4.0, 1e-3) == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK(transport_flow(1.0, 0, 1, 4.0) == 1.0);
  CHECK(transport_term(1.0, 1.0, 4.0) == -3.0);
  CHECK(grid_min(1.0, 0, 1, 4.0, 1e-3) == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK_THROWS_AS(transport_flow(0.0, -1, 1, 1.0), ModelError);
}

TEST_CASE("transport: closed form matches grid search") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ug(0.05, 2.0), ub(0.0, 3.0), ur(-8.0, 8.0);
  for (int i = 0; i < 200; ++i) {
    const double g = ug(rng), lo = -ub(rng), hi = ub(rng), r = ur(rng);
    const double f = transport_flow(g, lo, hi, r);
    CHECK(std::abs(transport_term(g, f, r) - grid_min(g, lo, hi, r, 1e-4)) <= 1e-6);
  }
}

TEST_CASE("transport: zero price gives zero flows") {
  const SystemModel m = fixtures::two_node(2, 3);
  const TransportSolution s = solve_transport(m, HourlySeries(2, 2, 3));
  CHECK(s.value == 0.0);
  for (double f : s.flows.data) CHECK(f == 0.0);
  for (double g : transport_hourly_gradient(m, s).data) CHECK(g == 0.0);
  CHECK(transport_cost_to_go(s, 0) == 0.0);
  CHECK(transport_cost_to_go(s, 2) == 0.0);
}

TEST_CASE("transport: gradient signs and finite differences") {
  // r = p1 - p2 = 4, gamma 1 -> f = 2 on each arc.
  for (double cap2 : {0.0, 10.0}) {
    const SystemModel m = parallel_pair(10.0, cap2);
    HourlySeries p(2, 1, 1);
    p.at(0, 0, 0) = 4.0;
    const TransportSolution s = solve_transport(m, p);
    const HourlySeries g = transport_hourly_gradient(m, s);
    const double total = cap2 > 0 ? 4.0 : 2.0;
    CHECK(g.at(0, 0, 0) == doctest::Approx(-total));
    CHECK(g.at(1, 0, 0) == doctest::Approx(total));
    for (int n = 0; n < 2; ++n) {
      const double eps = 1e-5;
      HourlySeries a = p, b = p;
      a.at(n, 0, 0) += eps;
      b.at(n, 0, 0) -= eps;
      const double fd = (solve_transport(m, a).value - solve_transport(m, b).value) / (2 * eps);
      CHECK(fd == doctest::Approx(g.at(n, 0, 0)).epsilon(1e-6));
    }
  }
}

TEST_CASE("transport: value is concave with supergradients and bounded by zero") {
  const SystemModel m({2, 3},
                      {fixtures::plain_node("a"), fixtures::plain_node("b"), fixtures::plain_node("c")},
                      {Arc{"ab", "a", "b", -2, 3, 0.3}, Arc{"bc", "b", "c", -1, 1, 0.7}, Arc{"ac", "a", "c", 0, 2, 0.1}});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5, 5);
  auto rand_price = [&] {
    HourlySeries p(3, 2, 3);
    for (double& v : p.data) v = u(rng);
    return p;
  };
  for (int t = 0; t < 100; ++t) {
    const HourlySeries p = rand_price(), q = rand_price();
    const TransportSolution sp = solve_transport(m, p), sq = solve_transport(m, q);
    CHECK(sp.value <= 0.0);
    double recomputed = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int w = 0; w < 2; ++w)
        for (int h = 0; h < 3; ++h) {
          const double r = p.at(m.arc_from(a), w, h) - p.at(m.arc_to(a), w, h);
          const double f = sp.flows.at(a, w, h);
          CHECK(f >= m.arcs()[a].flow_min);
          CHECK(f <= m.arcs()[a].flow_max);
          recomputed += transport_term(m.arcs()[a].quad_cost, f, r);
        }
    CHECK(std::abs(recomputed - sp.value) <= 1e-9);
    for (double alpha : {0.25, 0.5, 0.75}) {
      HourlySeries mix(3, 2, 3);
      for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = alpha * p.data[i] + (1 - alpha) * q.data[i];
      CHECK(solve_transport(m, mix).value >= alpha * sp.value + (1 - alpha) * sq.value - 1e-9);
    }
    const HourlySeries g = transport_hourly_gradient(m, sp);
    double lin = sp.value;
    for (std::size_t i = 0; i < g.data.size(); ++i) lin += g.data[i] * (q.data[i] - p.data[i]);
    CHECK(sq.value <= lin + 1e-9);
  }
}

TEST_CASE("transport: cost-to-go sums remaining weeks") {
  const SystemModel m = fixtures::two_node(3, 2);
  PriceProcess price(m, BlockScheme(1, 2));
  for (std::size_t i = 0; i < price.size(); ++i) price.values()[i] = static_cast<double>(i % 5);
  const TransportSolution s = solve_transport(m, expand_price(price));
  CHECK(transport_cost_to_go(m, price, 0) == doctest::Approx(s.value));
  CHECK(transport_cost_to_go(m, price, 3) == 0.0);
  CHECK(transport_cost_to_go(s, 1) == doctest::Approx(s.week_values[1] + s.week_values[2]));
}

TEST_CASE("price: dimensions, expansion and aggregation") {
  CHECK(price_dimension(30, 52, BlockScheme(1, 168)) == 30L * 52 * 168);
  CHECK(price_dimension(30, 52, BlockScheme(8, 168)) == 32760);
  CHECK(price_dimension(30, 52, BlockScheme(168, 168)) == 1560);
  CHECK_NOTHROW(BlockScheme(7, 168));
  CHECK_THROWS_AS(BlockScheme(5, 168), ModelError);

  PriceProcess weekly(1, 1, BlockScheme(168, 168), 3.0);
  const HourlySeries e = expand_price(weekly);
  CHECK(e.data.size() == 168);
  for (double v : e.data) CHECK(v == 3.0);

  HourlySeries g(1, 1, 4);
  g.data = {1, 2, 3, 4};
  CHECK(aggregate_gradient(g, BlockScheme(2, 4)) == std::vector<double>{3, 7});
  CHECK_THROWS_AS(aggregate_gradient(g, BlockScheme(2, 6)), ShapeError);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int block : {1, 2, 3, 6}) {
    PriceProcess p(2, 3, BlockScheme(block, 6));
    for (double& v : p.values()) v = u(rng);
    HourlySeries hg(2, 3, 6);
    for (double& v : hg.data) v = u(rng);
    const HourlySeries ep = expand_price(p);
    const auto ag = aggregate_gradient(hg, p.scheme());
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < hg.data.size(); ++i) lhs += ep.data[i] * hg.data[i];
    for (std::size_t i = 0; i < ag.size(); ++i) rhs += p.values()[i] * ag[i];
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}
