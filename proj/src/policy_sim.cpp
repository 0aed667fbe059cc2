#include "gdadp/policy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gdadp/parallel.hpp"

namespace gdadp {

ChronicleRecord simulate_chronicle(const SystemModel& model, const GlobalCostToGo& ctg, const YearChronicle& chronicle,
                                   const std::vector<double>& initial_levels, const SimulationOptions& options) {
  if (static_cast<int>(chronicle.weeks.size()) != model.weeks()) {
    throw ShapeError("simulate_chronicle: chronicle '" + chronicle.id + "' has the wrong horizon");
  }
  ChronicleRecord rec;
  rec.chronicle = chronicle.id;
  std::vector<double> x = initial_levels;
  rec.levels.push_back(x);
  for (int s = 0; s < model.weeks(); ++s) {
    JointWeekLp lp(model, chronicle.weeks[s], x, &ctg, s, options.joint);
    lp.solve();
    const JointWeekSolution w = lp.solution();
    rec.thermal_cost += w.thermal_cost;
    rec.ens_cost += w.ens_cost;
    rec.ens_energy += w.ens_energy;
    rec.spill_cost += w.spill_cost;
    rec.transport_cost += w.transport_cost;
    for (int h = 0; h < model.hours(); ++h) {
      rec.node_flow.push_back(w.node_flow[h]);
      rec.arc_flow.push_back(w.arc_flow[h]);
    }
    for (int n = 0; n < model.num_nodes(); ++n) {
      const Node& nd = model.nodes()[n];
      x[n] = nd.has_storage() ? std::clamp(w.end_levels[n], 0.0, nd.capacity()) : 0.0;
    }
    rec.levels.push_back(x);
  }
  rec.final_penalty = total_final_cost(model, x);
  rec.operational = rec.thermal_cost + rec.ens_cost + rec.spill_cost + rec.transport_cost + rec.final_penalty;
  return rec;
}

double kirchhoff_residual(const SystemModel& model, const ChronicleRecord& record) {
  const Incidence& a = model.incidence();
  double worst = 0.0;
  for (std::size_t t = 0; t < record.node_flow.size(); ++t) {
    for (int n = 0; n < model.num_nodes(); ++n) {
      double af = 0.0;
      for (int k = 0; k < model.num_arcs(); ++k) af += a(n, k) * record.arc_flow[t][k];
      worst = std::max(worst, std::abs(record.node_flow[t][n] - af));
    }
  }
  return worst;
}

double reconciliation_error(const ChronicleRecord& r) {
  const double parts = r.thermal_cost + r.ens_cost + r.spill_cost + r.transport_cost + r.final_penalty;
  return std::abs(r.operational - parts) / std::max(1.0, std::abs(r.operational));
}

Interval confidence_interval(const std::vector<double>& values) {
  Interval out;
  out.samples = static_cast<int>(values.size());
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / (values.size() - 1));
  }
  const double half = 1.96 * out.stddev / std::sqrt(static_cast<double>(values.size()));
  out.lower = out.mean - half;
  out.upper = out.mean + half;
  return out;
}

namespace {
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const double t = pos - i;
  return i + 1 < sorted.size() ? (1 - t) * sorted[i] + t * sorted[i + 1] : sorted[i];
}
}  // namespace

int count_outliers(std::vector<double> values) {
  if (values.size() < 2) return 0;
  std::sort(values.begin(), values.end());
  const double q1 = quantile(values, 0.25), q3 = quantile(values, 0.75);
  const double iqr = q3 - q1;
  int out = 0;
  for (double v : values) out += (v < q1 - 1.5 * iqr || v > q3 + 1.5 * iqr);
  return out;
}

namespace {
std::vector<ChronicleRecord> simulate_all(const SystemModel& model, const GlobalCostToGo& ctg,
                                          const std::vector<YearChronicle>& chronicles,
                                          const std::vector<double>& initial_levels, const SimulationOptions& options) {
  std::vector<ChronicleRecord> records(chronicles.size());
  parallel_for(static_cast<int>(chronicles.size()), resolve_threads(options.threads), [&](int i) {
    records[i] = simulate_chronicle(model, ctg, chronicles[i], initial_levels, options);
  });
  return records;
}
}  // namespace

UpperBound statistical_upper_bound(const SystemModel& model, const GlobalCostToGo& ctg, const ScenarioSet& scenarios,
                                   int samples, std::mt19937_64& rng, const std::vector<double>& initial_levels,
                                   const SimulationOptions& options) {
  if (samples < 2) throw std::invalid_argument("statistical_upper_bound: at least 2 samples are needed");
  std::vector<YearChronicle> draws;
  for (int i = 0; i < samples; ++i) draws.push_back(sample_product_chronicle(rng, scenarios));
  UpperBound out;
  out.records = simulate_all(model, ctg, draws, initial_levels, options);
  std::vector<double> costs;
  for (const auto& r : out.records) costs.push_back(r.operational);
  out.cost = confidence_interval(costs);
  return out;
}

SimulationReport summarize(const SystemModel& model, const std::string& method, std::vector<ChronicleRecord> records) {
  SimulationReport rep;
  rep.method = method;
  std::vector<double> costs;
  const double inv = records.empty() ? 0.0 : 1.0 / records.size();
  for (const auto& r : records) {
    costs.push_back(r.operational);
    rep.thermal_cost += inv * r.thermal_cost;
    rep.ens_cost += inv * r.ens_cost;
    rep.ens_gwh += inv * r.ens_energy / 1000.0;
    rep.spill_cost += inv * r.spill_cost;
    rep.transport_cost += inv * r.transport_cost;
    rep.final_penalty += inv * r.final_penalty;
    rep.max_kirchhoff_residual = std::max(rep.max_kirchhoff_residual, kirchhoff_residual(model, r));
    rep.max_reconciliation_error = std::max(rep.max_reconciliation_error, reconciliation_error(r));
  }
  rep.operational = confidence_interval(costs);
  rep.outliers = count_outliers(costs);
  rep.records = std::move(records);
  return rep;
}

SimulationReport evaluate_reference(const SystemModel& model, const GlobalCostToGo& ctg, const ScenarioSet& evaluation,
                                    const std::vector<double>& initial_levels, const SimulationOptions& options) {
  return summarize(model, ctg.method(), simulate_all(model, ctg, evaluation.chronicles(), initial_levels, options));
}

}  // namespace gdadp
