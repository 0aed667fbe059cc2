#include "gdadp/price.hpp"

namespace gdadp {

BlockScheme::BlockScheme(int block_hours, int hours_per_week)
    : block_hours_(block_hours), hours_per_week_(hours_per_week) {
  if (block_hours < 1 || hours_per_week < 1 || hours_per_week % block_hours != 0) {
    throw ModelError("block size " + std::to_string(block_hours) + " does not divide the " +
                     std::to_string(hours_per_week) + " hours of a week");
  }
}

long price_dimension(int nodes, int weeks, const BlockScheme& scheme) {
  return static_cast<long>(nodes) * weeks * scheme.blocks_per_week();
}

long price_dimension(const SystemModel& model, const BlockScheme& scheme) {
  if (scheme.hours_per_week() != model.hours()) {
    throw ShapeError("block scheme built for " + std::to_string(scheme.hours_per_week()) + " hours, model has " +
                     std::to_string(model.hours()));
  }
  return price_dimension(model.num_nodes(), model.weeks(), scheme);
}

PriceProcess::PriceProcess(int nodes, int weeks, BlockScheme scheme, double fill)
    : nodes_(nodes), weeks_(weeks), scheme_(scheme),
      values_(static_cast<std::size_t>(price_dimension(nodes, weeks, scheme)), fill) {}

PriceProcess::PriceProcess(const SystemModel& model, BlockScheme scheme, double fill)
    : PriceProcess(model.num_nodes(), model.weeks(), scheme, fill) {
  price_dimension(model, scheme);
}

HourlySeries expand_price(const PriceProcess& price) {
  const BlockScheme& sc = price.scheme();
  HourlySeries out(price.nodes(), price.weeks(), sc.hours_per_week());
  for (int n = 0; n < price.nodes(); ++n)
    for (int w = 0; w < price.weeks(); ++w)
      for (int h = 0; h < sc.hours_per_week(); ++h) out.at(n, w, h) = price.at(n, w, sc.block_of(h));
  return out;
}

std::vector<double> aggregate_gradient(const HourlySeries& hourly, const BlockScheme& scheme) {
  if (hourly.hours != scheme.hours_per_week()) {
    throw ShapeError("aggregate_gradient: " + std::to_string(hourly.hours) + " hours per week, scheme expects " +
                     std::to_string(scheme.hours_per_week()));
  }
  const int blocks = scheme.blocks_per_week();
  std::vector<double> out(static_cast<std::size_t>(hourly.nodes) * hourly.weeks * blocks, 0.0);
  for (int n = 0; n < hourly.nodes; ++n)
    for (int w = 0; w < hourly.weeks; ++w)
      for (int h = 0; h < hourly.hours; ++h)
        out[(static_cast<std::size_t>(n) * hourly.weeks + w) * blocks + scheme.block_of(h)] += hourly.at(n, w, h);
  return out;
}

}  // namespace gdadp
