#pragma once

// Bounded-variable simplex used by every weekly subproblem.
//
// Problems are stated as   min c'x   s.t.  rl <= A x <= ru,  l <= x <= u.
// Internally each row gets a logical variable r = A x, so the working system is
// A x - r = 0 with bounds on all n + m variables. The solver keeps a dense basis
// inverse (a few hundred rows at most here) with rank-one updates and sparse
// columns; after bound or right-hand-side changes the last basis stays dual
// feasible and the dual simplex restores primal feasibility in a few pivots.

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gdadp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
  int col;
  double value;
};

/// Row-oriented LP description. Columns and rows are appended incrementally.
class Problem {
 public:
  int add_column(double cost, double lower, double upper);
  int add_row(double lower, double upper, std::vector<Entry> entries);
  void add_entry(int row, int col, double value);

  int num_columns() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(row_lower_.size()); }

  void set_cost(int col, double cost) { cost_.at(col) = cost; }
  void set_column_bounds(int col, double lower, double upper);
  void set_row_bounds(int row, double lower, double upper);

  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& column_lower() const { return col_lower_; }
  const std::vector<double>& column_upper() const { return col_upper_; }
  const std::vector<double>& row_lower() const { return row_lower_; }
  const std::vector<double>& row_upper() const { return row_upper_; }
  const std::vector<std::vector<Entry>>& rows() const { return rows_; }

 private:
  std::vector<double> cost_, col_lower_, col_upper_;
  std::vector<double> row_lower_, row_upper_;
  std::vector<std::vector<Entry>> rows_;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(Status status);

class SolveError : public std::runtime_error {
 public:
  SolveError(Status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

struct Options {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-10;
  int refactor_interval = 100;
  int max_iterations = 0;  // 0 selects 50 * (rows + columns) + 10000
  int degenerate_before_bland = 50;
};

class DenseSimplex {
 public:
  explicit DenseSimplex(const Problem& problem, Options options = {});

  Status solve();

  // Modifications keep the current basis; the next solve() warm starts.
  void set_column_bounds(int col, double lower, double upper);
  void set_row_bounds(int row, double lower, double upper);
  void set_cost(int col, double cost);

  int num_columns() const { return n_; }
  int num_rows() const { return m_; }

  double objective() const;
  double value(int col) const { return x_[col]; }
  std::vector<double> primal() const;
  double row_activity(int row) const { return x_[n_ + row]; }
  /// Objective sensitivity to the active bound of a row.
  double row_dual(int row) const { return d_[n_ + row]; }
  /// Objective sensitivity to the value of a nonbasic column (zero if basic).
  double reduced_cost(int col) const { return d_[col]; }

  Status status() const { return status_; }
  long iterations() const { return iterations_; }

 private:
  enum class VarState : unsigned char { Basic, Lower, Upper, Zero };

  void refactor();
  void column(int j, Eigen::VectorXd& out) const;    // B^-1 a_j
  void pivot_row(int row, Eigen::VectorXd& out) const;  // row of B^-1 [A | -I]
  void recompute_basic_values();
  void recompute_reduced_costs();
  void place_nonbasic(int j);
  double nonbasic_value(int j) const;
  void pivot(int row, int col, const Eigen::VectorXd& alpha_q, const Eigen::VectorXd& alpha_r);

  bool primal_feasible() const;
  bool dual_feasible() const;
  double infeasibility(int var) const;

  Status run_primal();
  Status run_dual();

  Options opt_;
  int n_ = 0;  // structural columns
  int m_ = 0;  // rows (= logical columns)
  std::vector<std::vector<Entry>> rows_;  // A by row; Entry::col is the column
  std::vector<std::vector<Entry>> cols_;  // A by column; Entry::col is the row
  Eigen::MatrixXd binv_;                  // m x m
  Eigen::VectorXd d_;  // reduced costs, n+m
  std::vector<double> c_, lo_, hi_, x_;
  std::vector<VarState> state_;
  std::vector<int> head_;  // basic variable of each row
  Status status_ = Status::IterationLimit;
  long iterations_ = 0;
  int since_refactor_ = 0;
  bool dirty_ = true;
};

}  // namespace gdadp::lp
