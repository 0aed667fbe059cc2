// Command-line driver: dadp, sddp, exact, simulate, compare, generate.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gdadp/coordinator.hpp"
#include "gdadp/io.hpp"
#include "gdadp/parallel.hpp"
#include "gdadp/policy_sim.hpp"
#include "gdadp/reference.hpp"
#include "gdadp/synthetic.hpp"

namespace fs = std::filesystem;
using namespace gdadp;
using io::Json;

namespace {

// Bad input detected before any solve; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string config;
  std::string system, scenarios, evaluation, cost_to_go, out, warm_start;
  int block_hours = 8;
  double tol_euro = 100.0;
  double tol_rel = 0.0;
  int max_iters = 0;  // 0: per-command default
  double time_limit = 0.0;
  int threads = 0;
  std::uint64_t seed = 1;
  int samples = -1;  // -1: per-command default
  int grid_points = 0;
  bool integer_grid = false;
  bool check = false;
};

void add_common(CLI::App* cmd, Settings& s) {
  cmd->add_option("--config", s.config, "JSON file with default values for the options below");
  cmd->add_option("--system", s.system, "system description (JSON)");
  cmd->add_option("--scenarios", s.scenarios, "training chronicles (CSV file or directory)");
  cmd->add_option("--out", s.out, "output directory");
  cmd->add_option("--threads", s.threads, "worker threads (default: GRID_DADP_THREADS or 1)");
  cmd->add_option("--seed", s.seed, "random seed");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// Options given on the command line win over the config file.
void merge_config(CLI::App* cmd, Settings& s) {
  if (s.config.empty()) return;
  const fs::path cfg_path(s.config);
  const Json cfg = io::read_json(cfg_path);
  if (!cfg.is_object()) throw UsageError("'" + s.config + "': config must be a JSON object");
  const fs::path base = cfg_path.parent_path();
  auto unset = [&](const char* flag) {
    try {
      return cmd->get_option(flag)->count() == 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  auto take = [&](const char* key, const char* flag, auto& target) {
    if (!cfg.contains(key) || !unset(flag)) return;
    try {
      cfg.at(key).get_to(target);
    } catch (const nlohmann::json::exception&) {
      throw UsageError("'" + s.config + "': key '" + key + "' has the wrong type");
    }
  };
  auto take_path = [&](const char* key, const char* flag, std::string& target) {
    if (!cfg.contains(key) || !unset(flag)) return;
    std::string v;
    take(key, flag, v);
    target = resolve(base, v).string();
  };
  take_path("system", "--system", s.system);
  take_path("scenarios", "--scenarios", s.scenarios);
  take_path("evaluation", "--evaluation", s.evaluation);
  take_path("cost_to_go", "--cost-to-go", s.cost_to_go);
  take_path("out", "--out", s.out);
  take_path("warm_start", "--warm-start", s.warm_start);
  take("block_hours", "--block-hours", s.block_hours);
  take("tol_euro", "--tol-euro", s.tol_euro);
  take("tol_rel", "--tol-rel", s.tol_rel);
  take("max_iters", "--max-iters", s.max_iters);
  take("time_limit", "--time-limit", s.time_limit);
  take("threads", "--threads", s.threads);
  take("seed", "--seed", s.seed);
  take("samples", "--samples", s.samples);
  take("grid_points", "--grid-points", s.grid_points);
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw UsageError(std::string(what) + " not found: '" + p.string() + "'");
}

fs::path prepare_out(const Settings& s) {
  require(s.out, "--out");
  fs::create_directories(s.out);
  return fs::path(s.out);
}

SystemModel load_model(const Settings& s) {
  require(s.system, "--system");
  require_file(s.system, "system file");
  try {
    return io::load_system(s.system);
  } catch (const io::IoError& e) {
    throw UsageError(e.what());
  }
}

ScenarioSet load_set(const std::string& path, const SystemModel& model, ScenarioRole role, const char* flag) {
  require(path, flag);
  require_file(path, "chronicle file");
  try {
    return load_chronicles(path, model, role);
  } catch (const ScenarioError& e) {
    throw UsageError(e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Wall times live apart from the reports so that reports stay reproducible.
void record_timing(const fs::path& dir, const std::string& step, double seconds) {
  const fs::path p = dir / "timings.json";
  Json j = fs::exists(p) ? io::read_json(p) : io::artifact("timings");
  j["seconds"][step] = seconds;
  io::write_json(p, j);
}

std::string secant_note(const SystemModel& m, const JointOptions& joint) {
  double bound = 0.0;
  for (const Arc& a : m.arcs()) {
    const double w = (a.flow_max - a.flow_min) / joint.secant_segments;
    bound += a.quad_cost * w * w / 4.0;
  }
  return "transport secant error <= " + io::format_number(bound) + " EUR per hour (all arcs)";
}

int cmd_dadp(const Settings& s) {
  const SystemModel model = load_model(s);
  std::optional<BlockScheme> scheme;
  try {
    scheme.emplace(s.block_hours, model.hours());
  } catch (const ModelError& e) {
    throw UsageError("--block-hours " + std::to_string(s.block_hours) + ": " + e.what());
  }
  std::cerr << "[dadp] price dimension " << price_dimension(model, *scheme) << " (" << scheme->blocks_per_week()
            << " blocks of " << s.block_hours << " h per week)\n";
  if (s.check) return 0;

  const ScenarioSet training = load_set(s.scenarios, model, ScenarioRole::Training, "--scenarios");
  const fs::path out = prepare_out(s);
  const auto x0 = model.initial_levels();
  PriceProcess start(model, *scheme);
  if (!s.warm_start.empty()) {
    require_file(s.warm_start, "warm-start price");
    start = io::price_from_json(io::read_json(s.warm_start));
    if (start.nodes() != model.num_nodes() || start.weeks() != model.weeks() ||
        start.scheme().block_hours() != s.block_hours || start.scheme().hours_per_week() != model.hours())
      throw UsageError("warm-start price '" + s.warm_start + "' does not match the system and block scheme");
  }
  AscentConfig cfg;
  cfg.tolerance = s.tol_euro;
  cfg.relative_tolerance = s.tol_rel;
  cfg.time_limit_seconds = s.time_limit;
  if (s.max_iters > 0) cfg.max_iterations = s.max_iters;
  OracleOptions opt;
  opt.threads = resolve_threads(s.threads);
  if (s.grid_points > 0) opt.nodal.grid_points = s.grid_points;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<TraceEntry> trace;
  const AscentResult res =
      improve_prices(model, training, x0, start, cfg, opt,
                     [&](const TraceEntry& e, const PriceProcess&, const PriceProcess& best) {
                       trace.push_back(e);
                       std::cerr << "[dadp] iter " << e.iteration << " value " << io::format_number(e.value)
                                 << " best " << io::format_number(e.best) << " |g| "
                                 << io::format_number(e.gradient_norm) << "\n";
                       io::write_json_atomic(out / "trace.json", io::trace_to_json(trace, "running"));
                       io::write_json_atomic(out / "price.json", io::price_to_json(best));
                     });
  const double wall = seconds_since(t0);

  std::vector<double> tc;
  for (int w = 0; w <= model.weeks(); ++w) tc.push_back(transport_cost_to_go(res.best.transport, w));
  io::write_json(out / "price.json", io::price_to_json(res.best_price));
  io::write_json(out / "trace.json", io::trace_to_json(res.trace, res.stop_reason));
  io::write_json(out / "cost_to_go.json",
                 io::cost_to_go_to_json(io::dadp_artifact(res.best.value_functions, tc, res.best.value, x0)));
  record_timing(out, "dadp", wall);
  std::cout << "dadp lower bound " << io::format_number(res.best.value) << " after " << res.trace.size()
            << " iterations (" << res.stop_reason << ")\n";
  return 0;
}

int cmd_sddp(const Settings& s) {
  const SystemModel model = load_model(s);
  const ScenarioSet training = load_set(s.scenarios, model, ScenarioRole::Training, "--scenarios");
  const fs::path out = prepare_out(s);
  const auto x0 = model.initial_levels();
  SddpConfig cfg;
  cfg.tolerance = s.tol_euro;
  cfg.time_limit_seconds = s.time_limit;
  cfg.seed = s.seed;
  if (s.max_iters > 0) cfg.max_iterations = s.max_iters;
  if (s.samples > 0) cfg.samples = s.samples;
  std::cerr << "[sddp] " << secant_note(model, cfg.joint) << "\n";
  const auto t0 = std::chrono::steady_clock::now();
  const SddpResult res = sddp_solve(model, training, x0, cfg);
  const double wall = seconds_since(t0);
  std::vector<TraceEntry> trace;
  double best = -lp::kInf;
  for (std::size_t i = 0; i < res.lower_bounds.size(); ++i) {
    best = std::max(best, res.lower_bounds[i]);
    TraceEntry e;
    e.iteration = static_cast<int>(i);
    e.value = res.lower_bounds[i];
    e.best = best;
    trace.push_back(e);
  }
  io::write_json(out / "trace.json", io::trace_to_json(trace, res.stop_reason));
  io::write_json(out / "cost_to_go.json", io::cost_to_go_to_json(io::sddp_artifact(res, x0)));
  record_timing(out, "sddp", wall);
  std::cout << "sddp lower bound " << io::format_number(res.lower_bound()) << " after " << res.iterations
            << " iterations (" << res.stop_reason << ")\n";
  return 0;
}

int cmd_exact(const Settings& s) {
  const SystemModel model = load_model(s);
  const ScenarioSet training = load_set(s.scenarios, model, ScenarioRole::Training, "--scenarios");
  const fs::path out = prepare_out(s);
  const auto x0 = model.initial_levels();
  const auto grids = s.integer_grid ? integer_grids(model, x0)
                                    : reference_grids(model, s.grid_points > 0 ? s.grid_points : 11, x0);
  ExactDpOptions opt;
  opt.threads = resolve_threads(s.threads);
  std::cerr << "[exact] " << secant_note(model, opt.joint) << "\n";
  const auto t0 = std::chrono::steady_clock::now();
  const ExactDP dp = exact_global_dp(model, training, grids, x0, opt);
  const double wall = seconds_since(t0);
  io::write_json(out / "cost_to_go.json", io::cost_to_go_to_json(io::exact_artifact(dp)));
  record_timing(out, "exact", wall);
  std::cout << "exact optimum " << io::format_number(dp.optimum) << " (" << dp.grid.size() << " grid points, "
            << dp.stage_solves << " stage solves)\n";
  return 0;
}

int cmd_simulate(const Settings& s) {
  const SystemModel model = load_model(s);
  require(s.cost_to_go, "--cost-to-go");
  require_file(s.cost_to_go, "cost-to-go artifact");
  io::CostToGoArtifact art;
  std::unique_ptr<GlobalCostToGo> ctg;
  try {
    art = io::cost_to_go_from_json(io::read_json(s.cost_to_go));
    ctg = art.build(model);
  } catch (const io::IoError& e) {
    throw UsageError("'" + s.cost_to_go + "': " + e.what());
  }
  const int samples = s.samples >= 0 ? s.samples : 200;
  if (samples == 1) throw UsageError("--samples must be 0 (skip) or at least 2");
  std::optional<ScenarioSet> training;
  if (samples > 0) training.emplace(load_set(s.scenarios, model, ScenarioRole::Training, "--scenarios"));
  const ScenarioSet evaluation = s.evaluation.empty()
                                     ? load_set(s.scenarios, model, ScenarioRole::Evaluation, "--scenarios")
                                     : load_set(s.evaluation, model, ScenarioRole::Evaluation, "--evaluation");
  const fs::path out = prepare_out(s);
  SimulationOptions opt;
  opt.threads = resolve_threads(s.threads);
  std::cerr << "[simulate] " << secant_note(model, opt.joint) << "\n";

  const auto t0 = std::chrono::steady_clock::now();
  Interval ub;
  if (samples > 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32), 0x5eedu};
    std::mt19937_64 rng(seq);
    ub = statistical_upper_bound(model, *ctg, *training, samples, rng, art.initial_levels, opt).cost;
  }
  SimulationReport rep = evaluate_reference(model, *ctg, evaluation, art.initial_levels, opt);
  rep.method = art.method;
  const double wall = seconds_since(t0);

  const io::Report report = io::make_report(rep, art.lower_bound, ub);
  io::write_json(out / "report.json", io::report_to_json(report));
  io::write_records_csv(out / "records.csv", rep.records);
  io::write_trajectories_csv(out / "trajectories.csv", model, rep.records);
  record_timing(out, "simulate", wall);
  std::cout << art.method << " evaluation mean " << io::format_number(rep.operational.mean);
  if (samples > 0) std::cout << ", upper bound " << io::format_number(ub.mean);
  std::cout << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& runs, const Settings& s) {
  if (runs.empty()) throw UsageError("compare needs at least one run directory");
  std::vector<io::Report> reports;
  std::vector<Json> timings;
  for (const auto& r : runs) {
    const fs::path p = fs::path(r) / "report.json";
    require_file(p, "report");
    try {
      reports.push_back(io::report_from_json(io::read_json(p)));
    } catch (const io::IoError& e) {
      throw UsageError("'" + p.string() + "': " + e.what());
    }
    const fs::path t = fs::path(r) / "timings.json";
    timings.push_back(fs::exists(t) ? io::read_json(t) : Json::object());
  }
  const fs::path out = prepare_out(s);

  Json rows = Json::array();
  std::ofstream csv(out / "comparison.csv");
  csv << "method,lower_bound,upper_bound,ci_lower,ci_upper,gap_percent,mean_cost,thermal_cost,ens_cost,ens_gwh\n";
  for (const auto& r : reports) {
    // Without product samples the evaluation set stands in for the upper bound.
    const Interval& ub = r.upper_bound.samples > 0 ? r.upper_bound : r.evaluation;
    const double gap = io::gap_percent(r.lower_bound, ub.mean);
    rows.push_back({{"method", r.method},
                    {"lower_bound", r.lower_bound},
                    {"upper_bound", ub.mean},
                    {"ci_lower", ub.lower},
                    {"ci_upper", ub.upper},
                    {"gap_percent", gap},
                    {"mean_cost", r.evaluation.mean},
                    {"thermal_cost", r.thermal_cost},
                    {"ens_cost", r.ens_cost},
                    {"ens_gwh", r.ens_gwh}});
    csv << r.method;
    for (double v : {r.lower_bound, ub.mean, ub.lower, ub.upper, gap, r.evaluation.mean, r.thermal_cost, r.ens_cost,
                     r.ens_gwh})
      csv << ',' << io::format_number(v);
    csv << '\n';
  }
  Json doc = io::artifact("comparison");
  doc["rows"] = rows;
  io::write_json(out / "comparison.json", doc);

  std::ofstream tcsv(out / "timings.csv");
  tcsv << "run,method,step,wall_seconds\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!timings[i].contains("seconds")) continue;
    for (const auto& [step, sec] : timings[i]["seconds"].items())
      tcsv << fs::path(runs[i]).filename().string() << ',' << reports[i].method << ',' << step << ','
           << io::format_number(sec.get<double>()) << '\n';
  }
  std::cout << "compared " << reports.size() << " runs into " << out.string() << "\n";
  return 0;
}

int cmd_generate(const std::string& kind, int weeks, int hours, int training, int evaluation, const Settings& s) {
  const fs::path out = prepare_out(s);
  Instance inst = kind == "micro" ? micro_instance(s.seed)
                                  : tutorial_instance(weeks, hours, training, evaluation, s.seed);
  io::write_json(out / "system.json", io::system_to_json(inst.model));
  write_chronicles(out / "training.csv", inst.training, inst.model);
  write_chronicles(out / "evaluation.csv", inst.evaluation, inst.model);
  Json cfg = {{"system", "system.json"}, {"scenarios", "training.csv"}, {"evaluation", "evaluation.csv"}};
  if (inst.model.hours() % 8 != 0) cfg["block_hours"] = 1;
  io::write_json(out / "config.json", cfg);
  std::cout << "wrote " << kind << " instance to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storage usage values by dual approximate dynamic programming, with SDDP and exact references"};
  app.require_subcommand(1);
  Settings s;

  auto* dadp = app.add_subcommand("dadp", "price decomposition: nodal value functions and a lower bound");
  add_common(dadp, s);
  dadp->add_option("--block-hours", s.block_hours, "hours per price block, must divide the week");
  dadp->add_option("--tol-euro", s.tol_euro, "stop when the best bound improves by less than this");
  dadp->add_option("--tol-rel", s.tol_rel, "relative threshold: stop below max(tol-euro, tol-rel * |bound|)");
  dadp->add_option("--max-iters", s.max_iters, "iteration budget (default 50)");
  dadp->add_option("--time-limit", s.time_limit, "seconds, 0 for none");
  dadp->add_option("--grid-points", s.grid_points, "initial nodal storage grid size (default 51)");
  dadp->add_option("--warm-start", s.warm_start, "price.json to start from instead of zero prices");
  dadp->add_flag("--check", s.check, "validate the inputs and exit");

  auto* sddp = app.add_subcommand("sddp", "SDDP reference cuts and lower bound");
  add_common(sddp, s);
  sddp->add_option("--tol-euro", s.tol_euro, "stop after small lower-bound improvements");
  sddp->add_option("--max-iters", s.max_iters, "iteration budget (default 200)");
  sddp->add_option("--time-limit", s.time_limit, "seconds, 0 for none");
  sddp->add_option("--samples", s.samples, "forward trajectories per iteration");

  auto* exact = app.add_subcommand("exact", "exact dynamic programming on a product grid");
  add_common(exact, s);
  exact->add_option("--grid-points", s.grid_points, "uniform levels per storage axis (default 11)");
  exact->add_flag("--integer-grid", s.integer_grid, "use every integer level instead");

  auto* sim = app.add_subcommand("simulate", "simulate a cost-to-go policy and write a report");
  add_common(sim, s);
  sim->add_option("--cost-to-go", s.cost_to_go, "cost_to_go.json from dadp, sddp or exact");
  sim->add_option("--evaluation", s.evaluation, "evaluation chronicles (default: --scenarios)");
  sim->add_option("--samples", s.samples, "product-measure samples for the upper bound (default 200, 0 skips)");

  std::vector<std::string> runs;
  auto* cmp = app.add_subcommand("compare", "tabulate reports of several runs");
  cmp->add_option("runs", runs, "run directories holding report.json");
  cmp->add_option("--out", s.out, "output directory")->required();

  std::string kind = "tutorial";
  int g_weeks = 8, g_hours = 24, g_train = 5, g_eval = 5;
  auto* gen = app.add_subcommand("generate", "write a synthetic instance");
  gen->add_option("--kind", kind, "tutorial or micro")->check(CLI::IsMember({"tutorial", "micro"}));
  gen->add_option("--out", s.out, "output directory")->required();
  gen->add_option("--seed", s.seed, "random seed");
  gen->add_option("--weeks", g_weeks, "tutorial weeks");
  gen->add_option("--hours", g_hours, "tutorial hours per week");
  gen->add_option("--training", g_train, "tutorial training chronicles");
  gen->add_option("--evaluation", g_eval, "tutorial evaluation chronicles");

  CLI11_PARSE(app, argc, argv);
  try {
    for (auto* cmd : {dadp, sddp, exact, sim}) {
      if (cmd->parsed()) merge_config(cmd, s);
    }
    if (dadp->parsed()) return cmd_dadp(s);
    if (sddp->parsed()) return cmd_sddp(s);
    if (exact->parsed()) return cmd_exact(s);
    if (sim->parsed()) return cmd_simulate(s);
    if (cmp->parsed()) return cmd_compare(runs, s);
    if (gen->parsed()) return cmd_generate(kind, g_weeks, g_hours, g_train, g_eval, s);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
