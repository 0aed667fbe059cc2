#pragma once

// Global cost-to-go families usable inside the joint weekly LP, and that LP.
// Week s of the joint LP optimizes hours of week s for all nodes at once, with
// Kirchhoff coupling and a secant linearization of the quadratic transport
// cost, plus the cost-to-go at the end of the week.

#include <memory>
#include <string>
#include <vector>

#include "gdadp/lp.hpp"
#include "gdadp/model.hpp"
#include "gdadp/nodal_sdp.hpp"
#include "gdadp/scenarios.hpp"

namespace gdadp {

class GlobalCostToGo {
 public:
  virtual ~GlobalCostToGo() = default;
  virtual std::string method() const = 0;

  /// Adds the epigraph of the cost-to-go at the start of `week` (1 <= week < |W|)
  /// to `lp`; `level_cols[n]` is the column of node n's level or -1 without storage.
  virtual void append(int week, lp::Problem& lp, const std::vector<int>& level_cols) const = 0;
  /// Part of the cost-to-go that does not depend on the state.
  virtual double constant(int week) const { (void)week; return 0.0; }
  /// Cost-to-go at the start of `week` for the given levels (week < |W|).
  virtual double evaluate(int week, const std::vector<double>& levels) const = 0;
};

/// Final penalty epigraph, shared by every family at the horizon.
void append_final_cost(const SystemModel& model, lp::Problem& lp, const std::vector<int>& level_cols);
double total_final_cost(const SystemModel& model, const std::vector<double>& levels);

/// Sum of nodal cut models plus the constant transport cost-to-go.
class DadpProxy : public GlobalCostToGo {
 public:
  DadpProxy(const SystemModel& model, std::vector<std::vector<std::vector<Cut>>> cuts,
            std::vector<double> transport_constants);
  DadpProxy(const SystemModel& model, const std::vector<NodeValueFunction>& vfs,
            std::vector<double> transport_constants);

  std::string method() const override { return "dadp"; }
  void append(int week, lp::Problem& lp, const std::vector<int>& level_cols) const override;
  double constant(int week) const override;
  double evaluate(int week, const std::vector<double>& levels) const override;

  /// cuts()[n][s] for weeks 0..|W|.
  const std::vector<std::vector<std::vector<Cut>>>& cuts() const { return cuts_; }
  const std::vector<double>& transport_constants() const { return transport_; }

 private:
  const SystemModel* model_;
  std::vector<std::vector<std::vector<Cut>>> cuts_;
  std::vector<double> transport_;  // transport cost-to-go from week s, s = 0..|W|
};

struct MultiCut {
  double intercept = 0.0;
  std::vector<double> slopes;
  double operator()(const std::vector<double>& x) const;
  bool operator==(const MultiCut&) const = default;
};

/// Multivariate cuts, one list per week; values are known to be nonnegative.
class SddpCostToGo : public GlobalCostToGo {
 public:
  SddpCostToGo(const SystemModel& model, int weeks) : model_(&model), cuts_(weeks + 1) {}
  SddpCostToGo(const SystemModel& model, std::vector<std::vector<MultiCut>> cuts)
      : model_(&model), cuts_(std::move(cuts)) {}

  std::string method() const override { return "sddp"; }
  void append(int week, lp::Problem& lp, const std::vector<int>& level_cols) const override;
  double evaluate(int week, const std::vector<double>& levels) const override;

  void add_cut(int week, MultiCut cut) { cuts_.at(week).push_back(std::move(cut)); }
  const std::vector<std::vector<MultiCut>>& cuts() const { return cuts_; }

 private:
  const SystemModel* model_;
  std::vector<std::vector<MultiCut>> cuts_;
};

/// Tables on a product grid, read through the lower convex envelope of the
/// table points (the convex-combination form that fits in an LP).
class ProductGrid {
 public:
  explicit ProductGrid(std::vector<std::vector<double>> axes);
  std::size_t size() const { return size_; }
  int dims() const { return static_cast<int>(axes_.size()); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  std::vector<double> point(std::size_t index) const;
  /// Index of an exact grid point, or -1.
  long find(const std::vector<double>& levels, double tol = 1e-9) const;

 private:
  std::vector<std::vector<double>> axes_;
  std::size_t size_;
};

class ExactDpCostToGo : public GlobalCostToGo {
 public:
  ExactDpCostToGo(const SystemModel& model, ProductGrid grid, std::vector<std::vector<double>> tables)
      : model_(&model), grid_(std::move(grid)), tables_(std::move(tables)) {}

  std::string method() const override { return "exact"; }
  void append(int week, lp::Problem& lp, const std::vector<int>& level_cols) const override;
  double evaluate(int week, const std::vector<double>& levels) const override;

  const ProductGrid& grid() const { return grid_; }
  const std::vector<std::vector<double>>& tables() const { return tables_; }

 private:
  const SystemModel* model_;
  ProductGrid grid_;
  std::vector<std::vector<double>> tables_;  // tables_[s][point], s = 0..|W|
};

struct JointOptions {
  int secant_segments = 16;
};

struct JointWeekSolution {
  double objective = 0.0;  // operational + future
  double thermal_cost = 0.0;
  double ens_cost = 0.0;
  double ens_energy = 0.0;  // MWh
  double spill_cost = 0.0;
  double transport_cost = 0.0;
  double future = 0.0;
  std::vector<double> end_levels;             // per node
  std::vector<double> level_duals;            // d objective / d initial level, per node
  std::vector<std::vector<double>> node_flow;  // [hour][node], import positive
  std::vector<std::vector<double>> arc_flow;   // [hour][arc]
  std::vector<std::vector<double>> thermal;    // [hour][node] total thermal output
  std::vector<std::vector<double>> ens;        // [hour][node]

  double operational() const { return thermal_cost + ens_cost + spill_cost + transport_cost; }
};

class JointWeekLp {
 public:
  JointWeekLp(const SystemModel& model, const WeeklyChronicle& week_data, const std::vector<double>& levels,
              const GlobalCostToGo* cost_to_go, int week, JointOptions options = {});

  void set_levels(const std::vector<double>& levels);
  /// Solves and returns the objective including constant terms.
  double solve();
  JointWeekSolution solution() const;
  std::vector<double> level_duals() const;

 private:
  struct NodeHour {
    std::vector<int> thermal;
    int ens = -1, curtail = -1, flow = -1, turbine = -1, pump = -1, spill = -1, level = -1;
  };
  const SystemModel& model_;
  int week_;
  lp::Problem p_;
  std::vector<int> x0_;
  std::vector<std::vector<NodeHour>> cols_;             // [node][hour]
  std::vector<std::vector<std::vector<int>>> segs_;     // [arc][hour][segment]
  std::vector<double> seg_width_;
  int first_future_col_ = 0;
  double constant_ = 0.0;       // transport secant constants
  double future_constant_ = 0.0;
  std::unique_ptr<lp::DenseSimplex> simplex_;
};

}  // namespace gdadp
