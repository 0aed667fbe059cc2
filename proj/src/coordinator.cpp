#include "gdadp/coordinator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>

#include "gdadp/parallel.hpp"

namespace gdadp {

OracleResult oracle(const SystemModel& model, const ScenarioSet& training, const std::vector<double>& initial_levels,
                    const PriceProcess& price, const OracleOptions& options) {
  const int nn = model.num_nodes();
  if (static_cast<int>(initial_levels.size()) != nn) throw ShapeError("oracle: one initial level per node expected");
  if (price.nodes() != nn || price.weeks() != model.weeks() || price.scheme().hours_per_week() != model.hours()) {
    throw ShapeError("oracle: price process does not match the model");
  }
  const HourlySeries hourly = expand_price(price);
  OracleResult out;
  out.value_functions.resize(nn);
  std::vector<std::string> errors(nn);
  parallel_for(nn, resolve_threads(options.threads), [&](int n) {
    try {
      NodalOptions opt = options.nodal;
      opt.initial_level = initial_levels[n];
      NodeValueFunction vf = backward_recursion(model, n, hourly, price.scheme(), training, opt);
      gradient_recursion(vf);
      out.value_functions[n] = std::move(vf);
    } catch (const std::exception& e) {
      errors[n] = e.what();
    }
  });
  for (int n = 0; n < nn; ++n) {
    if (!errors[n].empty()) throw OracleError("oracle failed at node '" + model.nodes()[n].id + "': " + errors[n]);
  }
  out.transport = solve_transport(model, hourly);
  out.transport_value = out.transport.value;
  out.gradient = aggregate_gradient(transport_hourly_gradient(model, out.transport), price.scheme());
  const std::size_t per_node = static_cast<std::size_t>(model.weeks()) * price.blocks();
  for (int n = 0; n < nn; ++n) {
    const NodeValueFunction& vf = out.value_functions[n];
    out.node_values.push_back(interpolate_value(vf, 0, initial_levels[n]));
    const std::vector<double> g = interpolate_gradient(vf, 0, initial_levels[n]);
    for (std::size_t k = 0; k < per_node; ++k) out.gradient[n * per_node + k] += g[k];
  }
  out.value = std::accumulate(out.node_values.begin(), out.node_values.end(), 0.0) + out.transport_value;
  return out;
}

double lower_bound(const OracleResult& result) { return result.value; }

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Two-loop recursion on the minimization of -V: returns an ascent direction.
std::vector<double> lbfgs_direction(const std::vector<double>& g, const std::deque<std::vector<double>>& ss,
                                    const std::deque<std::vector<double>>& ys) {
  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) q[i] = -g[i];
  const int m = static_cast<int>(ss.size());
  std::vector<double> alpha(m), rho(m);
  for (int k = m - 1; k >= 0; --k) {
    rho[k] = 1.0 / dot(ys[k], ss[k]);
    alpha[k] = rho[k] * dot(ss[k], q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * ys[k][i];
  }
  const double scale = dot(ss.back(), ys.back()) / dot(ys.back(), ys.back());
  for (double& v : q) v *= scale;
  for (int k = 0; k < m; ++k) {
    const double beta = rho[k] * dot(ys[k], q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += ss[k][i] * (alpha[k] - beta);
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

AscentResult improve_prices(const SystemModel& model, const ScenarioSet& training,
                            const std::vector<double>& initial_levels, const PriceProcess& start,
                            const AscentConfig& config, const OracleOptions& options,
                            const AscentCallback& on_iteration) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  AscentResult res{start, {}, {}, "", 0};
  PriceProcess p = start;
  OracleResult cur = oracle(model, training, initial_levels, p, options);
  ++res.oracle_calls;
  if (!std::isfinite(cur.value)) throw OracleError("oracle returned a non-finite value");
  res.best = cur;
  auto push = [&](int it, double step, int ls) {
    TraceEntry e{it, cur.value, res.best.value, std::sqrt(dot(cur.gradient, cur.gradient)), step, ls, elapsed()};
    res.trace.push_back(e);
    if (on_iteration) on_iteration(e, p, res.best_price);
  };
  push(0, 0.0, 0);

  std::deque<std::vector<double>> ss, ys;
  int small = 0;
  bool failed_before = false;
  for (int it = 1;; ++it) {
    const double gnorm = std::sqrt(dot(cur.gradient, cur.gradient));
    if (gnorm == 0.0) {
      res.stop_reason = "zero gradient";
      break;
    }
    if (it > config.max_iterations) {
      res.stop_reason = "iteration limit";
      break;
    }
    if (config.time_limit_seconds > 0.0 && elapsed() >= config.time_limit_seconds) {
      res.stop_reason = "time limit";
      break;
    }
    std::vector<double> d;
    auto steepest = [&] {
      d = cur.gradient;
      for (double& v : d) v *= config.initial_step / gnorm;
    };
    if (ss.empty()) steepest();
    else {
      d = lbfgs_direction(cur.gradient, ss, ys);
      if (!(dot(d, cur.gradient) > 0.0)) {
        ss.clear();
        ys.clear();
        steepest();
      }
    }

    bool accepted = false;
    int evals = 0;
    double t = 1.0;
    PriceProcess q = p;
    OracleResult next;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const double slope = dot(cur.gradient, d);
      t = 1.0;
      for (int bt = 0; bt <= config.max_backtracks; ++bt) {
        for (std::size_t i = 0; i < q.size(); ++i) q.values()[i] = p.values()[i] + t * d[i];
        next = oracle(model, training, initial_levels, q, options);
        ++evals;
        ++res.oracle_calls;
        if (!std::isfinite(next.value)) throw OracleError("oracle returned a non-finite value");
        if (next.value >= cur.value + config.armijo * t * slope) {
          accepted = true;
          break;
        }
        t *= config.shrink;
      }
      if (!accepted && !ss.empty()) {
        ss.clear();
        ys.clear();
        steepest();
      } else {
        break;
      }
    }
    const double threshold = std::max(config.tolerance, config.relative_tolerance * std::abs(res.best.value));
    if (!accepted) {
      // No ascent found from p: an iteration with zero improvement.
      push(it, 0.0, evals);
      small = 0.0 < threshold ? small + 1 : small;
      if (small >= 2) {
        res.stop_reason = "improvement below tolerance";
        break;
      }
      if (failed_before) {
        res.stop_reason = "line search failed";
        break;
      }
      failed_before = true;
      continue;
    }
    failed_before = false;

    std::vector<double> s(q.size()), y(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      s[i] = q.values()[i] - p.values()[i];
      y[i] = cur.gradient[i] - next.gradient[i];
    }
    if (dot(s, y) > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      ss.push_back(std::move(s));
      ys.push_back(std::move(y));
      if (static_cast<int>(ss.size()) > config.memory) {
        ss.pop_front();
        ys.pop_front();
      }
    }
    const double previous_best = res.best.value;
    p = q;
    cur = std::move(next);
    if (cur.value > res.best.value) {
      res.best = cur;
      res.best_price = p;
    }
    push(it, t * std::sqrt(dot(d, d)), evals);
    small = res.best.value - previous_best < threshold ? small + 1 : 0;
    if (small >= 2) {
      res.stop_reason = "improvement below tolerance";
      break;
    }
  }
  return res;
}

}  // namespace gdadp
