#pragma once

// Uncertainty chronicles and the two probability structures built on them:
// the empirical probability (uniform over whole-year chronicles) and the
// empirical product probability (weeks drawn independently).

#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gdadp/model.hpp"

namespace gdadp {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodeWeekSeries {
  std::vector<double> net_demand;    // MW, may be negative
  std::vector<double> availability;  // fraction of every cluster capacity
  std::vector<double> inflow;        // MWh per hour
};

/// One week of uncertainty for every node, indexed by node position.
struct WeeklyChronicle {
  std::vector<NodeWeekSeries> nodes;
};

struct YearChronicle {
  std::string id;
  std::vector<WeeklyChronicle> weeks;
};

enum class ScenarioRole { Training, Evaluation };

class ScenarioSet {
 public:
  ScenarioSet(std::vector<YearChronicle> chronicles, ScenarioRole role);

  std::size_t size() const { return chronicles_.size(); }
  ScenarioRole role() const { return role_; }
  const std::vector<YearChronicle>& chronicles() const { return chronicles_; }
  const YearChronicle& operator[](std::size_t c) const { return chronicles_[c]; }
  const WeeklyChronicle& week(std::size_t c, int s) const { return chronicles_[c].weeks[s]; }
  double weight() const { return 1.0 / static_cast<double>(chronicles_.size()); }
  int weeks() const { return static_cast<int>(chronicles_.front().weeks.size()); }

 private:
  std::vector<YearChronicle> chronicles_;
  ScenarioRole role_;
};

/// Throws ScenarioError naming the chronicle, node, week and hour at fault.
void validate_chronicle(const YearChronicle& chronicle, const SystemModel& model);

/// Reads a CSV with columns chronicle,node,week,hour,net_demand,availability,inflow
/// (0-based week/hour). A directory is read as one CSV per chronicle, sorted by
/// file name; there the chronicle column is optional and defaults to the file stem.
ScenarioSet load_chronicles(const std::filesystem::path& path, const SystemModel& model,
                            ScenarioRole role = ScenarioRole::Training);

void write_chronicles(const std::filesystem::path& path, const ScenarioSet& set, const SystemModel& model);

double weekly_expectation(std::span<const double> values);

/// Week-by-week uniform draws of chronicle indices.
std::vector<int> sample_product_indices(std::mt19937_64& rng, std::size_t chronicles, int weeks);

YearChronicle sample_product_chronicle(std::mt19937_64& rng, const ScenarioSet& set);

/// Number of atoms of the empirical product probability, |C|^|W|.
boost::multiprecision::cpp_int count_product_support(const ScenarioSet& set);

}  // namespace gdadp
