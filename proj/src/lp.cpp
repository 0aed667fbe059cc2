#include "gdadp/lp.hpp"

#include <algorithm>
#include <cmath>

namespace gdadp::lp {

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration limit";
  }
  return "unknown";
}

int Problem::add_column(double cost, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("lp: column lower bound above upper bound");
  cost_.push_back(cost);
  col_lower_.push_back(lower);
  col_upper_.push_back(upper);
  return num_columns() - 1;
}

int Problem::add_row(double lower, double upper, std::vector<Entry> entries) {
  if (lower > upper) throw std::invalid_argument("lp: row lower bound above upper bound");
  for (const auto& e : entries) {
    if (e.col < 0 || e.col >= num_columns()) throw std::out_of_range("lp: row entry column out of range");
  }
  row_lower_.push_back(lower);
  row_upper_.push_back(upper);
  rows_.push_back(std::move(entries));
  return num_rows() - 1;
}

void Problem::add_entry(int row, int col, double value) {
  if (col < 0 || col >= num_columns()) throw std::out_of_range("lp: entry column out of range");
  rows_.at(row).push_back({col, value});
}

void Problem::set_column_bounds(int col, double lower, double upper) {
  col_lower_.at(col) = lower;
  col_upper_.at(col) = upper;
}

void Problem::set_row_bounds(int row, double lower, double upper) {
  row_lower_.at(row) = lower;
  row_upper_.at(row) = upper;
}

namespace {

double tol_at(double base, double bound) {
  return std::isfinite(bound) ? base * (1.0 + std::abs(bound)) : base;
}

}  // namespace

DenseSimplex::DenseSimplex(const Problem& problem, Options options)
    : opt_(options), n_(problem.num_columns()), m_(problem.num_rows()) {
  rows_.resize(m_);
  cols_.resize(n_);
  for (int i = 0; i < m_; ++i) {
    // Merge duplicate entries of a row.
    std::vector<Entry> r = problem.rows()[i];
    std::sort(r.begin(), r.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
    for (const Entry& e : r) {
      if (!rows_[i].empty() && rows_[i].back().col == e.col) {
        rows_[i].back().value += e.value;
      } else {
        rows_[i].push_back(e);
      }
    }
    std::erase_if(rows_[i], [](const Entry& e) { return e.value == 0.0; });
    for (const Entry& e : rows_[i]) cols_[e.col].push_back({i, e.value});
  }
  const int total = n_ + m_;
  c_.assign(total, 0.0);
  lo_.assign(total, 0.0);
  hi_.assign(total, 0.0);
  x_.assign(total, 0.0);
  state_.assign(total, VarState::Lower);
  for (int j = 0; j < n_; ++j) {
    c_[j] = problem.cost()[j];
    lo_[j] = problem.column_lower()[j];
    hi_[j] = problem.column_upper()[j];
  }
  for (int i = 0; i < m_; ++i) {
    lo_[n_ + i] = problem.row_lower()[i];
    hi_[n_ + i] = problem.row_upper()[i];
  }
  head_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    state_[n_ + i] = VarState::Basic;
  }
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  if (opt_.max_iterations <= 0) opt_.max_iterations = 50 * (m_ + n_) + 10000;
}

void DenseSimplex::place_nonbasic(int j) {
  const bool lo_ok = std::isfinite(lo_[j]);
  const bool hi_ok = std::isfinite(hi_[j]);
  if (state_[j] == VarState::Upper && hi_ok) {
    x_[j] = hi_[j];
  } else if (lo_ok) {
    state_[j] = VarState::Lower;
    x_[j] = lo_[j];
  } else if (hi_ok) {
    state_[j] = VarState::Upper;
    x_[j] = hi_[j];
  } else {
    state_[j] = VarState::Zero;
    x_[j] = 0.0;
  }
}

double DenseSimplex::nonbasic_value(int j) const {
  switch (state_[j]) {
    case VarState::Lower: return lo_[j];
    case VarState::Upper: return hi_[j];
    default: return 0.0;
  }
}

void DenseSimplex::set_column_bounds(int col, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("lp: column lower bound above upper bound");
  lo_.at(col) = lower;
  hi_.at(col) = upper;
  if (state_[col] != VarState::Basic) place_nonbasic(col);
}

void DenseSimplex::set_row_bounds(int row, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("lp: row lower bound above upper bound");
  const int j = n_ + row;
  lo_.at(j) = lower;
  hi_.at(j) = upper;
  if (state_[j] != VarState::Basic) place_nonbasic(j);
}

void DenseSimplex::set_cost(int col, double cost) {
  const double delta = cost - c_.at(col);
  if (delta == 0.0) return;
  c_[col] = cost;
  if (dirty_) return;
  if (state_[col] != VarState::Basic) {
    d_[col] += delta;
  } else {
    recompute_reduced_costs();
  }
}

double DenseSimplex::objective() const {
  double z = 0.0;
  for (int j = 0; j < n_; ++j) z += c_[j] * x_[j];
  return z;
}

std::vector<double> DenseSimplex::primal() const {
  return {x_.begin(), x_.begin() + n_};
}

void DenseSimplex::column(int j, Eigen::VectorXd& out) const {
  if (j >= n_) {
    out = -binv_.col(j - n_);
    return;
  }
  out.setZero(m_);
  for (const Entry& e : cols_[j]) out.noalias() += e.value * binv_.col(e.col);
}

void DenseSimplex::pivot_row(int row, Eigen::VectorXd& out) const {
  out.setZero(n_ + m_);
  for (int i = 0; i < m_; ++i) {
    const double rho = binv_(row, i);
    if (rho == 0.0) continue;
    for (const Entry& e : rows_[i]) out[e.col] += rho * e.value;
    out[n_ + i] = -rho;
  }
}

void DenseSimplex::refactor() {
  d_.resize(n_ + m_);
  if (m_ > 0) {
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      if (j < n_) {
        for (const Entry& e : cols_[j]) basis(e.col, i) = e.value;
      } else {
        basis(j - n_, i) = -1.0;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    if (!(lu.rcond() > 1e-14)) {
      // Numerically singular basis: fall back to the all-logical basis.
      for (int i = 0; i < m_; ++i) {
        if (head_[i] < n_) {
          state_[head_[i]] = VarState::Lower;
          place_nonbasic(head_[i]);
        }
        head_[i] = n_ + i;
        state_[n_ + i] = VarState::Basic;
      }
      binv_ = -Eigen::MatrixXd::Identity(m_, m_);
    } else {
      binv_ = lu.inverse();
    }
  } else {
    binv_.resize(0, 0);
  }
  since_refactor_ = 0;
  dirty_ = false;
  recompute_reduced_costs();
  recompute_basic_values();
}

void DenseSimplex::recompute_reduced_costs() {
  Eigen::VectorXd cb(m_);
  for (int i = 0; i < m_; ++i) cb[i] = c_[head_[i]];
  const Eigen::VectorXd y = binv_.transpose() * cb;
  for (int j = 0; j < n_; ++j) {
    double v = c_[j];
    for (const Entry& e : cols_[j]) v -= y[e.col] * e.value;
    d_[j] = v;
  }
  for (int i = 0; i < m_; ++i) d_[n_ + i] = c_[n_ + i] + y[i];
  for (int i = 0; i < m_; ++i) d_[head_[i]] = 0.0;
}

void DenseSimplex::recompute_basic_values() {
  const int total = n_ + m_;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < total; ++j) {
    if (state_[j] == VarState::Basic) continue;
    x_[j] = nonbasic_value(j);
    if (x_[j] == 0.0) continue;
    if (j < n_) {
      for (const Entry& e : cols_[j]) rhs[e.col] += e.value * x_[j];
    } else {
      rhs[j - n_] -= x_[j];
    }
  }
  if (m_ == 0) return;
  const Eigen::VectorXd xb = -(binv_ * rhs);
  for (int i = 0; i < m_; ++i) x_[head_[i]] = xb[i];
}

double DenseSimplex::infeasibility(int var) const {
  const double v = x_[var];
  if (v < lo_[var] - tol_at(opt_.primal_tolerance, lo_[var])) return v - lo_[var];
  if (v > hi_[var] + tol_at(opt_.primal_tolerance, hi_[var])) return v - hi_[var];
  return 0.0;
}

bool DenseSimplex::primal_feasible() const {
  for (int i = 0; i < m_; ++i) {
    if (infeasibility(head_[i]) != 0.0) return false;
  }
  return true;
}

bool DenseSimplex::dual_feasible() const {
  for (int j = 0; j < n_ + m_; ++j) {
    if (lo_[j] == hi_[j]) continue;
    const double tol = tol_at(opt_.dual_tolerance, c_[j]);
    switch (state_[j]) {
      case VarState::Lower:
        if (d_[j] < -tol) return false;
        break;
      case VarState::Upper:
        if (d_[j] > tol) return false;
        break;
      case VarState::Zero:
        if (std::abs(d_[j]) > tol) return false;
        break;
      case VarState::Basic: break;
    }
  }
  return true;
}

// alpha_q: entering column B^-1 a_q; alpha_r: pivot row of B^-1 [A | -I], both
// taken before the basis change.
void DenseSimplex::pivot(int row, int col, const Eigen::VectorXd& alpha_q, const Eigen::VectorXd& alpha_r) {
  const double piv = alpha_q[row];
  const double dc = d_[col];
  if (dc != 0.0) d_.noalias() -= (dc / piv) * alpha_r;
  Eigen::VectorXd eta = alpha_q;
  eta[row] = 0.0;
  const Eigen::RowVectorXd r = binv_.row(row) / piv;
  binv_.noalias() -= eta * r;
  binv_.row(row) = r;
  head_[row] = col;
  for (int i = 0; i < m_; ++i) d_[head_[i]] = 0.0;
  state_[col] = VarState::Basic;
  ++since_refactor_;
}

Status DenseSimplex::run_primal() {
  const int total = n_ + m_;
  Eigen::VectorXd w(m_);
  Eigen::VectorXd phase1_d(total);
  Eigen::VectorXd alpha_q(m_);
  Eigen::VectorXd alpha_r(total);
  int degenerate_run = 0;

  for (;;) {
    if (iterations_ >= opt_.max_iterations) return Status::IterationLimit;
    if (since_refactor_ >= opt_.refactor_interval) refactor();

    bool phase1 = false;
    for (int i = 0; i < m_; ++i) {
      const double inf = infeasibility(head_[i]);
      w[i] = inf < 0.0 ? -1.0 : (inf > 0.0 ? 1.0 : 0.0);
      if (inf != 0.0) phase1 = true;
    }
    const Eigen::VectorXd* dj = &d_;
    if (phase1) {
      // Gradient of the sum of infeasibilities: -(w' B^-1 [A | -I]).
      const Eigen::VectorXd u = binv_.transpose() * w;
      for (int j = 0; j < n_; ++j) {
        double v = 0.0;
        for (const Entry& e : cols_[j]) v -= u[e.col] * e.value;
        phase1_d[j] = v;
      }
      for (int i = 0; i < m_; ++i) phase1_d[n_ + i] = u[i];
      dj = &phase1_d;
    }

    const bool bland = degenerate_run >= opt_.degenerate_before_bland;
    int enter = -1;
    double enter_dir = 0.0;
    double best = 0.0;
    for (int j = 0; j < total; ++j) {
      const VarState s = state_[j];
      if (s == VarState::Basic || lo_[j] == hi_[j]) continue;
      const double dv = (*dj)[j];
      const double tol = phase1 ? opt_.dual_tolerance : tol_at(opt_.dual_tolerance, c_[j]);
      double dir = 0.0;
      if (s == VarState::Lower && dv < -tol) dir = 1.0;
      else if (s == VarState::Upper && dv > tol) dir = -1.0;
      else if (s == VarState::Zero && std::abs(dv) > tol) dir = dv < 0.0 ? 1.0 : -1.0;
      if (dir == 0.0) continue;
      if (bland) {
        enter = j;
        enter_dir = dir;
        break;
      }
      if (std::abs(dv) > best) {
        best = std::abs(dv);
        enter = j;
        enter_dir = dir;
      }
    }
    if (enter < 0) return phase1 ? Status::Infeasible : Status::Optimal;
    column(enter, alpha_q);

    // Ratio test (Harris two-pass). rate_i is the change of basic i per unit step.
    auto limit_of = [&](int i, double slack_tol, double& bound_hit) -> double {
      const double alpha = alpha_q[i];
      if (std::abs(alpha) < opt_.pivot_tolerance) return kInf;
      const double rate = -enter_dir * alpha;
      const int var = head_[i];
      const double v = x_[var];
      const double ftl = tol_at(opt_.primal_tolerance, lo_[var]);
      const double ftu = tol_at(opt_.primal_tolerance, hi_[var]);
      if (rate < 0.0) {
        if (phase1 && v < lo_[var] - ftl) return kInf;
        const double bound = (phase1 && v > hi_[var] + ftu) ? hi_[var] : lo_[var];
        if (!std::isfinite(bound)) return kInf;
        bound_hit = bound;
        const double tl = bound == lo_[var] ? ftl : ftu;
        return (v - bound + slack_tol * (tl / opt_.primal_tolerance)) / (-rate);
      }
      if (phase1 && v > hi_[var] + ftu) return kInf;
      const double bound = (phase1 && v < lo_[var] - ftl) ? lo_[var] : hi_[var];
      if (!std::isfinite(bound)) return kInf;
      bound_hit = bound;
      const double tl = bound == hi_[var] ? ftu : ftl;
      return (bound - v + slack_tol * (tl / opt_.primal_tolerance)) / rate;
    };

    double theta_max = kInf;
    double dummy = 0.0;
    for (int i = 0; i < m_; ++i) {
      theta_max = std::min(theta_max, limit_of(i, bland ? 0.0 : opt_.primal_tolerance, dummy));
    }
    int leave = -1;
    double leave_bound = 0.0;
    double step = kInf;
    double best_alpha = 0.0;
    if (std::isfinite(theta_max)) {
      for (int i = 0; i < m_; ++i) {
        double bound = 0.0;
        const double lim = limit_of(i, 0.0, bound);
        if (!std::isfinite(lim) || lim > theta_max) continue;
        const double a = std::abs(alpha_q[i]);
        const bool better = bland ? (leave < 0 || head_[i] < head_[leave]) : a > best_alpha;
        if (better) {
          best_alpha = a;
          leave = i;
          leave_bound = bound;
          step = std::max(lim, 0.0);
        }
      }
    }

    const double range = hi_[enter] - lo_[enter];
    const bool flip = std::isfinite(range) && range <= step;
    if (flip) step = range;
    if (!std::isfinite(step)) {
      if (phase1) {
        // Cannot happen in exact arithmetic; rebuild and retry once.
        refactor();
        ++iterations_;
        continue;
      }
      return Status::Unbounded;
    }

    ++iterations_;
    degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
    if (step != 0.0) {
      x_[enter] += enter_dir * step;
      for (int i = 0; i < m_; ++i) {
        const double alpha = alpha_q[i];
        if (alpha != 0.0) x_[head_[i]] -= enter_dir * alpha * step;
      }
    }
    if (flip) {
      state_[enter] = enter_dir > 0.0 ? VarState::Upper : VarState::Lower;
      x_[enter] = nonbasic_value(enter);
      continue;
    }
    const int out = head_[leave];
    pivot_row(leave, alpha_r);
    pivot(leave, enter, alpha_q, alpha_r);
    state_[out] = (leave_bound == lo_[out]) ? VarState::Lower : VarState::Upper;
    x_[out] = leave_bound;
  }
}

Status DenseSimplex::run_dual() {
  const int total = n_ + m_;
  Eigen::VectorXd alpha_q(m_);
  Eigen::VectorXd alpha_r(total);
  for (;;) {
    if (iterations_ >= opt_.max_iterations) return Status::IterationLimit;
    if (since_refactor_ >= opt_.refactor_interval) {
      refactor();
      if (!dual_feasible()) return Status::IterationLimit;  // caller falls back to primal
    }
    int leave = -1;
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double inf = infeasibility(head_[i]);
      const double scale = 1.0 + std::abs(inf < 0.0 ? lo_[head_[i]] : hi_[head_[i]]);
      if (std::abs(inf) / scale > worst) {
        worst = std::abs(inf) / scale;
        leave = i;
      }
    }
    if (leave < 0) return Status::Optimal;

    const int out = head_[leave];
    const bool increase = x_[out] < lo_[out];
    const double target = increase ? lo_[out] : hi_[out];
    pivot_row(leave, alpha_r);

    auto eligible = [&](int j) -> bool {
      const VarState s = state_[j];
      if (s == VarState::Basic || lo_[j] == hi_[j]) return false;
      const double alpha = alpha_r[j];
      if (std::abs(alpha) < opt_.pivot_tolerance) return false;
      if (s == VarState::Zero) return true;
      const bool at_lower = s == VarState::Lower;
      return increase ? (at_lower ? alpha < 0.0 : alpha > 0.0) : (at_lower ? alpha > 0.0 : alpha < 0.0);
    };
    auto signed_d = [&](int j) -> double {
      switch (state_[j]) {
        case VarState::Lower: return std::max(d_[j], 0.0);
        case VarState::Upper: return std::max(-d_[j], 0.0);
        default: return std::abs(d_[j]);
      }
    };

    double theta_max = kInf;
    for (int j = 0; j < total; ++j) {
      if (!eligible(j)) continue;
      const double tol = tol_at(opt_.dual_tolerance, c_[j]);
      theta_max = std::min(theta_max, (signed_d(j) + tol) / std::abs(alpha_r[j]));
    }
    if (!std::isfinite(theta_max)) return Status::Infeasible;
    int enter = -1;
    double best_alpha = 0.0;
    for (int j = 0; j < total; ++j) {
      if (!eligible(j)) continue;
      const double a = std::abs(alpha_r[j]);
      if (signed_d(j) / a <= theta_max && a > best_alpha) {
        best_alpha = a;
        enter = j;
      }
    }

    ++iterations_;
    column(enter, alpha_q);
    const double delta = (x_[out] - target) / alpha_q[leave];
    x_[enter] += delta;
    for (int i = 0; i < m_; ++i) {
      const double alpha = alpha_q[i];
      if (alpha != 0.0) x_[head_[i]] -= alpha * delta;
    }
    pivot(leave, enter, alpha_q, alpha_r);
    state_[out] = increase ? VarState::Lower : VarState::Upper;
    x_[out] = target;
  }
}

Status DenseSimplex::solve() {
  if (dirty_) {
    refactor();
  } else {
    recompute_basic_values();
  }
  for (int round = 0; round < 4; ++round) {
    if (!primal_feasible() && dual_feasible()) {
      const Status s = run_dual();
      if (s == Status::Infeasible) {
        // Confirm with the primal phase 1 before reporting infeasibility.
        refactor();
      }
    }
    const Status s = run_primal();
    if (s != Status::Optimal) {
      status_ = s;
      return s;
    }
    refactor();
    if (primal_feasible() && dual_feasible()) {
      status_ = Status::Optimal;
      return status_;
    }
  }
  status_ = Status::Optimal;
  return status_;
}

}  // namespace gdadp::lp
