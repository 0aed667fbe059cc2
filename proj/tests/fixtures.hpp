#pragma once

#include <random>

#include "gdadp/model.hpp"
#include "gdadp/scenarios.hpp"

namespace fixtures {

inline gdadp::Node storage_node(const std::string& id, double capacity, double level, double turbine,
                                double pump = 0.0, double eta = 1.0) {
  gdadp::Node n;
  n.id = id;
  n.storage = gdadp::Storage{capacity, level, turbine, pump, eta};
  n.clusters = {{5.0, 20.0}, {5.0, 60.0}};
  return n;
}

inline gdadp::Node plain_node(const std::string& id) {
  gdadp::Node n;
  n.id = id;
  n.clusters = {{8.0, 30.0}};
  return n;
}

inline gdadp::Arc arc(const std::string& id, const std::string& from, const std::string& to, double cap,
                      double gamma = 0.05) {
  return gdadp::Arc{id, from, to, -cap, cap, gamma};
}

inline gdadp::SystemModel two_node(int weeks = 3, int hours = 2) {
  return gdadp::SystemModel({weeks, hours}, {storage_node("a", 20.0, 10.0, 6.0), plain_node("b")},
                            {arc("ab", "a", "b", 4.0)});
}

// Random chronicles with integer-valued data.
inline gdadp::ScenarioSet random_set(const gdadp::SystemModel& m, int count, unsigned seed,
                                     gdadp::ScenarioRole role = gdadp::ScenarioRole::Training) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> demand(2, 14);
  std::uniform_int_distribution<int> inflow(0, 4);
  std::uniform_int_distribution<int> avail(6, 10);
  std::vector<gdadp::YearChronicle> out;
  for (int c = 0; c < count; ++c) {
    gdadp::YearChronicle y;
    y.id = "c" + std::to_string(c);
    for (int s = 0; s < m.weeks(); ++s) {
      gdadp::WeeklyChronicle w;
      for (int n = 0; n < m.num_nodes(); ++n) {
        gdadp::NodeWeekSeries ser;
        for (int h = 0; h < m.hours(); ++h) {
          ser.net_demand.push_back(demand(rng));
          ser.availability.push_back(avail(rng) / 10.0);
          ser.inflow.push_back(m.nodes()[n].has_storage() ? inflow(rng) : 0.0);
        }
        w.nodes.push_back(std::move(ser));
      }
      y.weeks.push_back(std::move(w));
    }
    out.push_back(std::move(y));
  }
  return gdadp::ScenarioSet(std::move(out), role);
}

}  // namespace fixtures
