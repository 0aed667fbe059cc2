#pragma once

// Price decomposition process: one deterministic multiplier per
// (node, week, block), plus its expansion to hours and the adjoint
// aggregation of hourly gradients back to blocks.

#include <stdexcept>
#include <vector>

#include "gdadp/model.hpp"

namespace gdadp {

class BlockScheme {
 public:
  /// Throws ModelError unless block_hours divides hours_per_week.
  BlockScheme(int block_hours, int hours_per_week);

  int block_hours() const { return block_hours_; }
  int hours_per_week() const { return hours_per_week_; }
  int blocks_per_week() const { return hours_per_week_ / block_hours_; }
  int block_of(int hour) const { return hour / block_hours_; }

 private:
  int block_hours_;
  int hours_per_week_;
};

long price_dimension(int nodes, int weeks, const BlockScheme& scheme);
long price_dimension(const SystemModel& model, const BlockScheme& scheme);

/// Dense (node, week, hour) array, used for hourly prices and hourly gradients.
struct HourlySeries {
  int nodes = 0;
  int weeks = 0;
  int hours = 0;
  std::vector<double> data;

  HourlySeries() = default;
  HourlySeries(int n, int w, int h, double fill = 0.0)
      : nodes(n), weeks(w), hours(h), data(static_cast<std::size_t>(n) * w * h, fill) {}
  double& at(int n, int w, int h) { return data[(static_cast<std::size_t>(n) * weeks + w) * hours + h]; }
  double at(int n, int w, int h) const { return data[(static_cast<std::size_t>(n) * weeks + w) * hours + h]; }
  const double* week(int n, int w) const { return &data[(static_cast<std::size_t>(n) * weeks + w) * hours]; }
};

class PriceProcess {
 public:
  PriceProcess(int nodes, int weeks, BlockScheme scheme, double fill = 0.0);
  PriceProcess(const SystemModel& model, BlockScheme scheme, double fill = 0.0);

  int nodes() const { return nodes_; }
  int weeks() const { return weeks_; }
  const BlockScheme& scheme() const { return scheme_; }
  int blocks() const { return scheme_.blocks_per_week(); }
  std::size_t size() const { return values_.size(); }

  std::size_t index(int n, int w, int b) const {
    return (static_cast<std::size_t>(n) * weeks_ + w) * blocks() + b;
  }
  double& at(int n, int w, int b) { return values_[index(n, w, b)]; }
  double at(int n, int w, int b) const { return values_[index(n, w, b)]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int nodes_;
  int weeks_;
  BlockScheme scheme_;
  std::vector<double> values_;
};

/// Constant within each block.
HourlySeries expand_price(const PriceProcess& price);

/// Sums hourly entries inside each block; adjoint of expand_price.
std::vector<double> aggregate_gradient(const HourlySeries& hourly, const BlockScheme& scheme);

}  // namespace gdadp
