#include "gdadp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace gdadp::io {

namespace {

template <class T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw IoError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw IoError(where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const Json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("'" + path.string() + "': invalid JSON (" + e.what() + ")");
  }
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_json_atomic(const std::filesystem::path& path, const Json& doc) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_json(tmp, doc);
  std::filesystem::rename(tmp, path);
}

Json artifact(const std::string& kind) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

void check_artifact(const Json& doc, const std::string& kind, const std::string& where) {
  if (!doc.is_object() || !doc.contains("schema_version")) throw IoError(where + ": no schema_version");
  const int v = field<int>(doc, "schema_version", where);
  if (v != kSchemaVersion) {
    throw IoError(where + ": schema_version " + std::to_string(v) + " does not match " +
                  std::to_string(kSchemaVersion));
  }
  const auto k = field<std::string>(doc, "kind", where);
  if (k != kind) throw IoError(where + ": expected a '" + kind + "' artifact, found '" + k + "'");
}

Json system_to_json(const SystemModel& model) {
  Json j = artifact("system");
  j["timeline"] = {{"weeks", model.weeks()}, {"hours_per_week", model.hours()}};
  Json nodes = Json::array();
  for (const Node& n : model.nodes()) {
    Json jn;
    jn["id"] = n.id;
    if (n.storage) {
      jn["storage"] = {{"capacity", n.storage->capacity},
                       {"initial_level", n.storage->initial_level},
                       {"max_turbine", n.storage->max_turbine},
                       {"max_pump", n.storage->max_pump},
                       {"pump_efficiency", n.storage->pump_efficiency}};
    }
    Json cl = Json::array();
    for (const auto& c : n.clusters) cl.push_back({{"capacity", c.capacity}, {"marginal_cost", c.marginal_cost}});
    jn["clusters"] = cl;
    jn["penalties"] = {{"ens", n.ens_penalty}, {"spill", n.spill_penalty}, {"final_rate", n.final_penalty_rate}};
    if (n.final_target) jn["penalties"]["final_target"] = *n.final_target;
    nodes.push_back(jn);
  }
  j["nodes"] = nodes;
  Json arcs = Json::array();
  for (const Arc& a : model.arcs()) {
    arcs.push_back({{"id", a.id},
                    {"from", a.from},
                    {"to", a.to},
                    {"flow_min", a.flow_min},
                    {"flow_max", a.flow_max},
                    {"quad_cost", a.quad_cost}});
  }
  j["arcs"] = arcs;
  return j;
}

SystemModel system_from_json(const Json& doc) {
  if (doc.contains("schema_version")) check_artifact(doc, "system", "system");
  const Json& tl = doc.contains("timeline") ? doc["timeline"] : throw IoError("system: missing field 'timeline'");
  Timeline timeline{field<int>(tl, "weeks", "system.timeline"), field<int>(tl, "hours_per_week", "system.timeline")};
  std::vector<Node> nodes;
  const Json& jn = doc.contains("nodes") ? doc["nodes"] : throw IoError("system: missing field 'nodes'");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const Json& e = jn[i];
    std::string where = "system.nodes[" + std::to_string(i) + "]";
    Node n;
    n.id = field<std::string>(e, "id", where);
    where = "node '" + n.id + "'";
    if (e.contains("storage") && !e["storage"].is_null()) {
      const Json& s = e["storage"];
      const std::string ws = where + " storage";
      n.storage = Storage{field<double>(s, "capacity", ws), field<double>(s, "initial_level", ws),
                          field<double>(s, "max_turbine", ws), field_or<double>(s, "max_pump", 0.0, ws),
                          field_or<double>(s, "pump_efficiency", 1.0, ws)};
    }
    if (e.contains("clusters")) {
      for (const Json& c : e["clusters"]) {
        n.clusters.push_back(
            ThermalCluster{field<double>(c, "capacity", where + " cluster"), field<double>(c, "marginal_cost", where + " cluster")});
      }
    }
    if (e.contains("penalties")) {
      const Json& p = e["penalties"];
      const std::string wp = where + " penalties";
      n.ens_penalty = field_or<double>(p, "ens", n.ens_penalty, wp);
      n.spill_penalty = field_or<double>(p, "spill", n.spill_penalty, wp);
      n.final_penalty_rate = field_or<double>(p, "final_rate", n.final_penalty_rate, wp);
      if (p.contains("final_target")) n.final_target = field<double>(p, "final_target", wp);
    }
    nodes.push_back(std::move(n));
  }
  std::vector<Arc> arcs;
  if (doc.contains("arcs")) {
    for (std::size_t i = 0; i < doc["arcs"].size(); ++i) {
      const Json& a = doc["arcs"][i];
      const std::string where = "system.arcs[" + std::to_string(i) + "]";
      arcs.push_back(Arc{field<std::string>(a, "id", where), field<std::string>(a, "from", where),
                         field<std::string>(a, "to", where), field<double>(a, "flow_min", where),
                         field<double>(a, "flow_max", where), field<double>(a, "quad_cost", where)});
    }
  }
  SystemModel model(timeline, std::move(nodes), std::move(arcs));
  const auto problems = validate_system(model);
  if (!problems.empty()) {
    std::string msg = "invalid system:";
    for (const auto& v : problems) msg += "\n  " + to_string(v);
    throw IoError(msg);
  }
  return model;
}

SystemModel load_system(const std::filesystem::path& path) {
  try {
    return system_from_json(read_json(path));
  } catch (const IoError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  } catch (const ModelError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

Json price_to_json(const PriceProcess& price) {
  Json j = artifact("price");
  j["nodes"] = price.nodes();
  j["weeks"] = price.weeks();
  j["hours_per_week"] = price.scheme().hours_per_week();
  j["block_hours"] = price.scheme().block_hours();
  j["values"] = price.values();
  return j;
}

PriceProcess price_from_json(const Json& doc) {
  check_artifact(doc, "price", "price");
  PriceProcess p(field<int>(doc, "nodes", "price"), field<int>(doc, "weeks", "price"),
                 BlockScheme(field<int>(doc, "block_hours", "price"), field<int>(doc, "hours_per_week", "price")));
  auto v = field<std::vector<double>>(doc, "values", "price");
  if (v.size() != p.size()) throw IoError("price: expected " + std::to_string(p.size()) + " values");
  p.values() = std::move(v);
  return p;
}

std::unique_ptr<GlobalCostToGo> CostToGoArtifact::build(const SystemModel& model) const {
  const auto weeks = static_cast<std::size_t>(model.weeks()) + 1;
  if (method == "dadp") {
    if (node_cuts.size() != static_cast<std::size_t>(model.num_nodes()) || transport_constants.size() != weeks)
      throw IoError("dadp cost-to-go does not match the system shape");
    for (const auto& c : node_cuts)
      if (c.size() != weeks) throw IoError("dadp cost-to-go does not match the system horizon");
    return std::make_unique<DadpProxy>(model, node_cuts, transport_constants);
  }
  if (method == "sddp") {
    if (multi_cuts.size() != weeks) throw IoError("sddp cost-to-go does not match the system horizon");
    for (const auto& wk : multi_cuts)
      for (const auto& c : wk)
        if (c.slopes.size() != static_cast<std::size_t>(model.num_nodes()))
          throw IoError("sddp cut dimension does not match the node count");
    return std::make_unique<SddpCostToGo>(model, multi_cuts);
  }
  if (method == "exact") {
    if (axes.size() != static_cast<std::size_t>(model.num_nodes()) || tables.size() != weeks)
      throw IoError("exact cost-to-go does not match the system shape");
    return std::make_unique<ExactDpCostToGo>(model, ProductGrid(axes), tables);
  }
  throw IoError("unknown cost-to-go method '" + method + "'");
}

CostToGoArtifact dadp_artifact(const std::vector<NodeValueFunction>& vfs, std::vector<double> transport_constants,
                               double lower_bound, std::vector<double> initial_levels) {
  CostToGoArtifact a;
  a.method = "dadp";
  a.lower_bound = lower_bound;
  a.initial_levels = std::move(initial_levels);
  a.transport_constants = std::move(transport_constants);
  for (const auto& vf : vfs) {
    auto& cuts = a.node_cuts.emplace_back();
    auto& grid = a.node_grid.emplace_back();
    auto& values = a.node_values.emplace_back();
    for (const auto& w : vf.weeks) {
      cuts.push_back(w.cuts);
      grid.push_back(w.grid);
      values.push_back(w.values);
    }
  }
  return a;
}

CostToGoArtifact sddp_artifact(const SddpResult& result, std::vector<double> initial_levels) {
  CostToGoArtifact a;
  a.method = "sddp";
  a.lower_bound = result.lower_bound();
  a.initial_levels = std::move(initial_levels);
  a.multi_cuts = result.cost_to_go.cuts();
  return a;
}

CostToGoArtifact exact_artifact(const ExactDP& exact) {
  CostToGoArtifact a;
  a.method = "exact";
  a.lower_bound = exact.optimum;
  a.initial_levels = exact.initial_levels;
  a.axes = exact.grid.axes();
  a.tables = exact.tables;
  return a;
}

Json cost_to_go_to_json(const CostToGoArtifact& a) {
  Json j = artifact("cost_to_go");
  j["method"] = a.method;
  j["lower_bound"] = a.lower_bound;
  j["initial_levels"] = a.initial_levels;
  if (a.method == "dadp") {
    Json vfs = Json::array();
    for (std::size_t n = 0; n < a.node_cuts.size(); ++n) {
      for (std::size_t s = 0; s < a.node_cuts[n].size(); ++s) {
        Json cuts = Json::array();
        for (const Cut& c : a.node_cuts[n][s]) cuts.push_back({{"intercept", c.intercept}, {"slope", c.slope}});
        vfs.push_back({{"node", n}, {"week", s}, {"cuts", cuts}, {"grid", a.node_grid[n][s]}, {"values", a.node_values[n][s]}});
      }
    }
    j["value_functions"] = vfs;
    j["transport_constants"] = a.transport_constants;
  } else if (a.method == "sddp") {
    Json weeks = Json::array();
    for (std::size_t s = 0; s < a.multi_cuts.size(); ++s) {
      Json cuts = Json::array();
      for (const MultiCut& c : a.multi_cuts[s]) cuts.push_back({{"intercept", c.intercept}, {"slopes", c.slopes}});
      weeks.push_back({{"week", s}, {"cuts", cuts}});
    }
    j["value_functions"] = weeks;
  } else if (a.method == "exact") {
    j["axes"] = a.axes;
    Json weeks = Json::array();
    for (std::size_t s = 0; s < a.tables.size(); ++s) weeks.push_back({{"week", s}, {"values", a.tables[s]}});
    j["value_functions"] = weeks;
  } else {
    throw IoError("unknown cost-to-go method '" + a.method + "'");
  }
  return j;
}

CostToGoArtifact cost_to_go_from_json(const Json& doc) {
  check_artifact(doc, "cost_to_go", "cost-to-go");
  CostToGoArtifact a;
  a.method = field<std::string>(doc, "method", "cost-to-go");
  a.lower_bound = field<double>(doc, "lower_bound", "cost-to-go");
  a.initial_levels = field<std::vector<double>>(doc, "initial_levels", "cost-to-go");
  const Json& vfs = doc.contains("value_functions") ? doc["value_functions"]
                                                     : throw IoError("cost-to-go: missing field 'value_functions'");
  if (a.method == "dadp") {
    a.transport_constants = field<std::vector<double>>(doc, "transport_constants", "cost-to-go");
    for (const Json& e : vfs) {
      const auto n = field<std::size_t>(e, "node", "value function");
      const auto s = field<std::size_t>(e, "week", "value function");
      if (a.node_cuts.size() <= n) {
        a.node_cuts.resize(n + 1);
        a.node_grid.resize(n + 1);
        a.node_values.resize(n + 1);
      }
      if (a.node_cuts[n].size() <= s) {
        a.node_cuts[n].resize(s + 1);
        a.node_grid[n].resize(s + 1);
        a.node_values[n].resize(s + 1);
      }
      for (const Json& c : field<Json>(e, "cuts", "value function"))
        a.node_cuts[n][s].push_back(Cut{field<double>(c, "intercept", "cut"), field<double>(c, "slope", "cut")});
      a.node_grid[n][s] = field<std::vector<double>>(e, "grid", "value function");
      a.node_values[n][s] = field<std::vector<double>>(e, "values", "value function");
    }
  } else if (a.method == "sddp") {
    for (const Json& e : vfs) {
      const auto s = field<std::size_t>(e, "week", "value function");
      if (a.multi_cuts.size() <= s) a.multi_cuts.resize(s + 1);
      for (const Json& c : field<Json>(e, "cuts", "value function"))
        a.multi_cuts[s].push_back(
            MultiCut{field<double>(c, "intercept", "cut"), field<std::vector<double>>(c, "slopes", "cut")});
    }
  } else if (a.method == "exact") {
    a.axes = field<std::vector<std::vector<double>>>(doc, "axes", "cost-to-go");
    for (const Json& e : vfs) {
      const auto s = field<std::size_t>(e, "week", "value function");
      if (a.tables.size() <= s) a.tables.resize(s + 1);
      a.tables[s] = field<std::vector<double>>(e, "values", "value function");
    }
  } else {
    throw IoError("cost-to-go: unknown method '" + a.method + "'");
  }
  return a;
}

Json trace_to_json(const std::vector<TraceEntry>& trace, const std::string& stop_reason) {
  Json j = artifact("trace");
  Json rows = Json::array();
  for (const auto& t : trace) {
    rows.push_back({{"iteration", t.iteration},
                    {"value", t.value},
                    {"best", t.best},
                    {"gradient_norm", t.gradient_norm},
                    {"step", t.step},
                    {"line_search", t.line_search},
                    {"wall_seconds", t.wall_seconds}});
  }
  j["entries"] = rows;
  j["stop_reason"] = stop_reason;
  return j;
}

std::vector<TraceEntry> trace_from_json(const Json& doc) {
  check_artifact(doc, "trace", "trace");
  std::vector<TraceEntry> out;
  for (const Json& r : field<Json>(doc, "entries", "trace")) {
    TraceEntry t;
    t.iteration = field<int>(r, "iteration", "trace entry");
    t.value = field<double>(r, "value", "trace entry");
    t.best = field<double>(r, "best", "trace entry");
    t.gradient_norm = field<double>(r, "gradient_norm", "trace entry");
    t.step = field<double>(r, "step", "trace entry");
    t.line_search = field<int>(r, "line_search", "trace entry");
    t.wall_seconds = field<double>(r, "wall_seconds", "trace entry");
    out.push_back(t);
  }
  return out;
}

namespace {

Json interval_json(const Interval& i) {
  return {{"mean", i.mean}, {"lower", i.lower}, {"upper", i.upper}, {"stddev", i.stddev}, {"samples", i.samples}};
}

Interval interval_from(const Json& j, const std::string& where) {
  return Interval{field<double>(j, "mean", where), field<double>(j, "lower", where), field<double>(j, "upper", where),
                  field<double>(j, "stddev", where), field<int>(j, "samples", where)};
}

}  // namespace

Report make_report(const SimulationReport& evaluation, double lower_bound, const Interval& upper_bound) {
  Report r;
  r.method = evaluation.method;
  r.lower_bound = lower_bound;
  r.upper_bound = upper_bound;
  r.evaluation = evaluation.operational;
  r.thermal_cost = evaluation.thermal_cost;
  r.ens_cost = evaluation.ens_cost;
  r.ens_gwh = evaluation.ens_gwh;
  r.spill_cost = evaluation.spill_cost;
  r.transport_cost = evaluation.transport_cost;
  r.final_penalty = evaluation.final_penalty;
  r.outliers = evaluation.outliers;
  r.max_kirchhoff_residual = evaluation.max_kirchhoff_residual;
  r.max_reconciliation_error = evaluation.max_reconciliation_error;
  return r;
}

Json report_to_json(const Report& r) {
  Json j = artifact("report");
  j["method"] = r.method;
  j["lower_bound"] = r.lower_bound;
  j["upper_bound"] = interval_json(r.upper_bound);
  j["evaluation"] = interval_json(r.evaluation);
  j["thermal_cost"] = r.thermal_cost;
  j["ens_cost"] = r.ens_cost;
  j["ens_gwh"] = r.ens_gwh;
  j["spill_cost"] = r.spill_cost;
  j["transport_cost"] = r.transport_cost;
  j["final_penalty"] = r.final_penalty;
  j["outliers"] = r.outliers;
  j["max_kirchhoff_residual"] = r.max_kirchhoff_residual;
  j["max_reconciliation_error"] = r.max_reconciliation_error;
  return j;
}

Report report_from_json(const Json& doc) {
  check_artifact(doc, "report", "report");
  Report r;
  r.method = field<std::string>(doc, "method", "report");
  r.lower_bound = field<double>(doc, "lower_bound", "report");
  r.upper_bound = interval_from(field<Json>(doc, "upper_bound", "report"), "report.upper_bound");
  r.evaluation = interval_from(field<Json>(doc, "evaluation", "report"), "report.evaluation");
  r.thermal_cost = field<double>(doc, "thermal_cost", "report");
  r.ens_cost = field<double>(doc, "ens_cost", "report");
  r.ens_gwh = field<double>(doc, "ens_gwh", "report");
  r.spill_cost = field<double>(doc, "spill_cost", "report");
  r.transport_cost = field<double>(doc, "transport_cost", "report");
  r.final_penalty = field<double>(doc, "final_penalty", "report");
  r.outliers = field<int>(doc, "outliers", "report");
  r.max_kirchhoff_residual = field<double>(doc, "max_kirchhoff_residual", "report");
  r.max_reconciliation_error = field<double>(doc, "max_reconciliation_error", "report");
  return r;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_records_csv(const std::filesystem::path& path, const std::vector<ChronicleRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "chronicle,operational,thermal_cost,ens_cost,ens_mwh,spill_cost,transport_cost,final_penalty\n";
  for (const auto& r : records) {
    out << r.chronicle << ',' << format_number(r.operational) << ',' << format_number(r.thermal_cost) << ','
        << format_number(r.ens_cost) << ',' << format_number(r.ens_energy) << ',' << format_number(r.spill_cost)
        << ',' << format_number(r.transport_cost) << ',' << format_number(r.final_penalty) << '\n';
  }
}

void write_trajectories_csv(const std::filesystem::path& path, const SystemModel& model,
                            const std::vector<ChronicleRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "node,week,level,chronicle\n";
  for (const auto& r : records) {
    for (std::size_t s = 0; s < r.levels.size(); ++s) {
      for (int n = 0; n < model.num_nodes(); ++n) {
        if (!model.nodes()[n].has_storage()) continue;
        out << model.nodes()[n].id << ',' << s << ',' << format_number(r.levels[s][n]) << ',' << r.chronicle << '\n';
      }
    }
  }
}

double gap_percent(double lower_bound, double upper_bound) {
  return 100.0 * (upper_bound - lower_bound) / lower_bound;
}

}  // namespace gdadp::io
