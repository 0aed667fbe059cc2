#include "gdadp/synthetic.hpp"

#include <cmath>
#include <random>

namespace gdadp {

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::vector<YearChronicle> micro_chronicles(const SystemModel& m, int count, std::mt19937_64& rng,
                                            const std::string& prefix) {
  const double avail[] = {0.5, 0.75, 1.0, 1.0};
  std::vector<YearChronicle> out;
  for (int c = 0; c < count; ++c) {
    YearChronicle y{prefix + std::to_string(c), {}};
    for (int s = 0; s < m.weeks(); ++s) {
      WeeklyChronicle w;
      for (int n = 0; n < m.num_nodes(); ++n) {
        NodeWeekSeries ser;
        for (int h = 0; h < m.hours(); ++h) {
          ser.net_demand.push_back(uniform(rng, 0, 7));
          ser.availability.push_back(avail[uniform(rng, 0, 3)]);
          ser.inflow.push_back(m.nodes()[n].has_storage() ? uniform(rng, 0, 3) : 0.0);
        }
        w.nodes.push_back(std::move(ser));
      }
      y.weeks.push_back(std::move(w));
    }
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace

Instance micro_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int nn = uniform(rng, 2, 3);
  const int weeks = uniform(rng, 2, 4);
  const int hours = uniform(rng, 2, 3);
  const int chronicles = uniform(rng, 2, 3);
  std::vector<Node> nodes;
  for (int n = 0; n < nn; ++n) {
    Node nd;
    nd.id = std::string(1, static_cast<char>('a' + n));
    nd.clusters = {{4.0, static_cast<double>(uniform(rng, 10, 40))}, {4.0, static_cast<double>(uniform(rng, 50, 120))}};
    nd.spill_penalty = uniform(rng, 0, 1) ? 0.0 : 2.0;
    const bool storage = nn == 2 || n != 1;
    if (storage) {
      const int cap = nn == 2 ? uniform(rng, 6, 10) : uniform(rng, 4, 6);
      nd.storage = Storage{static_cast<double>(cap), static_cast<double>(uniform(rng, cap / 3, (2 * cap) / 3)),
                           static_cast<double>(uniform(rng, 2, 4)), static_cast<double>(uniform(rng, 0, 2)), 1.0};
    }
    nodes.push_back(std::move(nd));
  }
  std::vector<Arc> arcs;
  const double gammas[] = {0.25, 0.5, 1.0};
  for (int n = 0; n + 1 < nn; ++n) {
    arcs.push_back(Arc{nodes[n].id + nodes[n + 1].id, nodes[n].id, nodes[n + 1].id, -8.0, 8.0, gammas[uniform(rng, 0, 2)]});
  }
  SystemModel model({weeks, hours}, nodes, arcs);
  auto training = micro_chronicles(model, chronicles, rng, "t");
  auto evaluation = micro_chronicles(model, chronicles, rng, "e");
  return Instance{model, ScenarioSet(std::move(training), ScenarioRole::Training),
                  ScenarioSet(std::move(evaluation), ScenarioRole::Evaluation)};
}

Instance tutorial_instance(int weeks, int hours, int training, int evaluation, std::uint64_t seed) {
  Node north;
  north.id = "north";
  north.storage = Storage{1200.0, 700.0, 60.0, 0.0, 1.0};
  north.clusters = {{50.0, 25.0}, {30.0, 70.0}};
  Node center;
  center.id = "center";
  center.clusters = {{60.0, 35.0}, {50.0, 90.0}, {40.0, 160.0}, {40.0, 400.0}};
  Node south;
  south.id = "south";
  south.storage = Storage{300.0, 150.0, 30.0, 25.0, 0.8};
  south.clusters = {{30.0, 30.0}, {40.0, 110.0}};
  south.spill_penalty = 1.0;
  std::vector<Arc> arcs{{"north-center", "north", "center", -50.0, 50.0, 0.01},
                        {"center-south", "center", "south", -40.0, 40.0, 0.01}};
  SystemModel model({weeks, hours}, {north, center, south}, arcs);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double base[] = {45.0, 120.0, 60.0};
  const double swing[] = {15.0, 40.0, 25.0};
  const double inflow_mean[] = {22.0, 0.0, 4.0};
  auto make = [&](int count, const std::string& prefix) {
    std::vector<YearChronicle> out;
    for (int c = 0; c < count; ++c) {
      YearChronicle y{prefix + std::to_string(c), {}};
      const double wet = 0.6 + 0.8 * u(rng);  // year-level hydrology
      for (int s = 0; s < weeks; ++s) {
        const double season = 1.0 + 0.25 * std::cos(2.0 * M_PI * s / std::max(1, weeks));
        const double cold = noise(rng);
        WeeklyChronicle w;
        for (int n = 0; n < 3; ++n) {
          NodeWeekSeries ser;
          const double outage = u(rng) < 0.15 ? 0.5 : 1.0;
          const double weekly_inflow = inflow_mean[n] * wet * (0.7 + 0.6 * u(rng)) / season;
          for (int h = 0; h < hours; ++h) {
            const double daily = std::sin(2.0 * M_PI * (h % 24) / 24.0 - M_PI / 2.0);
            const double d = base[n] * season + swing[n] * daily + 10.0 * cold + 4.0 * noise(rng);
            ser.net_demand.push_back(std::round(d * 10.0) / 10.0);
            ser.availability.push_back(std::min(1.0, outage * (0.85 + 0.15 * u(rng))));
            ser.inflow.push_back(std::round(weekly_inflow * 10.0) / 10.0);
          }
          w.nodes.push_back(std::move(ser));
        }
        y.weeks.push_back(std::move(w));
      }
      out.push_back(std::move(y));
    }
    return out;
  };
  auto tr = make(training, "train");
  auto ev = make(evaluation, "eval");
  return Instance{model, ScenarioSet(std::move(tr), ScenarioRole::Training),
                  ScenarioSet(std::move(ev), ScenarioRole::Evaluation)};
}

}  // namespace gdadp
