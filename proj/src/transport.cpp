#include "gdadp/transport.hpp"

#include <algorithm>

namespace gdadp {

double transport_flow(double gamma, double lo, double hi, double reduced_price) {
  if (!(gamma > 0.0)) throw ModelError("transport: quad_cost must be strictly positive");
  return std::clamp(reduced_price / (2.0 * gamma), lo, hi);
}

double transport_term(double gamma, double flow, double reduced_price) {
  return gamma * flow * flow - reduced_price * flow;
}

TransportSolution solve_transport(const SystemModel& model, const HourlySeries& p) {
  if (p.nodes != model.num_nodes() || p.weeks != model.weeks() || p.hours != model.hours()) {
    throw ShapeError("solve_transport: price shape does not match the model");
  }
  TransportSolution out;
  out.flows = ArcFlows{model.num_arcs(), model.weeks(), model.hours(),
                       std::vector<double>(static_cast<std::size_t>(model.num_arcs()) * model.weeks() * model.hours())};
  out.week_values.assign(model.weeks(), 0.0);
  for (int a = 0; a < model.num_arcs(); ++a) {
    const Arc& arc = model.arcs()[a];
    const int from = model.arc_from(a);
    const int to = model.arc_to(a);
    for (int w = 0; w < model.weeks(); ++w) {
      for (int h = 0; h < model.hours(); ++h) {
        const double r = p.at(from, w, h) - p.at(to, w, h);
        const double f = transport_flow(arc.quad_cost, arc.flow_min, arc.flow_max, r);
        out.flows.at(a, w, h) = f;
        out.week_values[w] += transport_term(arc.quad_cost, f, r);
      }
    }
  }
  for (double v : out.week_values) out.value += v;
  return out;
}

HourlySeries transport_hourly_gradient(const SystemModel& model, const TransportSolution& s) {
  HourlySeries g(model.num_nodes(), model.weeks(), model.hours());
  for (int a = 0; a < model.num_arcs(); ++a) {
    const int from = model.arc_from(a);
    const int to = model.arc_to(a);
    for (int w = 0; w < model.weeks(); ++w) {
      for (int h = 0; h < model.hours(); ++h) {
        const double f = s.flows.at(a, w, h);
        g.at(from, w, h) -= f;
        g.at(to, w, h) += f;
      }
    }
  }
  return g;
}

std::vector<double> transport_gradient(const SystemModel& model, const TransportSolution& s,
                                       const BlockScheme& scheme) {
  return aggregate_gradient(transport_hourly_gradient(model, s), scheme);
}

double transport_cost_to_go(const TransportSolution& s, int week) {
  double v = 0.0;
  for (int w = std::max(week, 0); w < static_cast<int>(s.week_values.size()); ++w) v += s.week_values[w];
  return v;
}

double transport_cost_to_go(const SystemModel& model, const PriceProcess& price, int week) {
  return transport_cost_to_go(solve_transport(model, expand_price(price)), week);
}

}  // namespace gdadp
