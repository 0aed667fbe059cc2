#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "gdadp/io.hpp"
#include "gdadp/synthetic.hpp"

using namespace gdadp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gdadp_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("io: system round trip") {
  const Instance inst = tutorial_instance();
  const io::Json j = io::system_to_json(inst.model);
  io::write_json(scratch("system.json"), j);
  const SystemModel back = io::load_system(scratch("system.json"));
  CHECK(io::system_to_json(back) == j);
  CHECK(back.nodes()[2].storage->pump_efficiency == inst.model.nodes()[2].storage->pump_efficiency);
}

TEST_CASE("io: system errors name the field") {
  io::Json j = io::system_to_json(micro_instance(1).model);
  j["nodes"][0].erase("id");
  CHECK_THROWS_WITH_AS(io::system_from_json(j), doctest::Contains("'id'"), io::IoError);
  j = io::system_to_json(micro_instance(1).model);
  j["nodes"][0]["storage"]["capacity"] = -1.0;
  CHECK_THROWS_AS(io::system_from_json(j), io::IoError);
  j = io::system_to_json(micro_instance(1).model);
  j["schema_version"] = 2;
  CHECK_THROWS_WITH_AS(io::system_from_json(j), doctest::Contains("schema_version"), io::IoError);
  j.erase("schema_version");
  CHECK_NOTHROW(io::system_from_json(j));
  CHECK_THROWS_WITH_AS(io::load_system(scratch("absent.json")), doctest::Contains("absent.json"), io::IoError);
}

TEST_CASE("io: price round trip") {
  PriceProcess p(3, 4, BlockScheme(8, 24));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(40, 30);
  for (double& v : p.values()) v = g(rng);
  const PriceProcess back = io::price_from_json(io::Json::parse(io::price_to_json(p).dump()));
  CHECK(back.values() == p.values());
  CHECK(back.scheme().block_hours() == 8);
  io::Json bad = io::price_to_json(p);
  bad["values"].erase(0);
  CHECK_THROWS_AS(io::price_from_json(bad), io::IoError);
}

TEST_CASE("io: cost-to-go artifacts reload equal and evaluate identically") {
  const Instance inst = micro_instance(1001);
  const auto& m = inst.model;
  const auto x0 = m.initial_levels();
  const OracleResult r = oracle(m, inst.training, x0, PriceProcess(m, BlockScheme(1, m.hours()), 30.0));
  std::vector<double> tc;
  for (int s = 0; s <= m.weeks(); ++s) tc.push_back(transport_cost_to_go(r.transport, s));
  const ExactDP dp = exact_global_dp(m, inst.training, reference_grids(m, 5, x0), x0);
  SddpConfig cfg;
  cfg.max_iterations = 5;
  const SddpResult sd = sddp_solve(m, inst.training, x0, cfg);
  for (const io::CostToGoArtifact& a :
       {io::dadp_artifact(r.value_functions, tc, r.value, x0), io::sddp_artifact(sd, x0), io::exact_artifact(dp)}) {
    const io::Json j = io::cost_to_go_to_json(a);
    const io::CostToGoArtifact back = io::cost_to_go_from_json(io::Json::parse(j.dump(2)));
    CHECK(back == a);
    const auto f = a.build(m);
    const auto g = back.build(m);
    CHECK(f->method() == a.method);
    for (int s = 0; s < m.weeks(); ++s) CHECK(f->evaluate(s, x0) == g->evaluate(s, x0));
  }
  const SystemModel other = micro_instance(1000).model;
  if (other.num_nodes() != m.num_nodes() || other.weeks() != m.weeks())
    CHECK_THROWS_AS(io::exact_artifact(dp).build(other), io::IoError);
}

TEST_CASE("io: trace and report round trip") {
  std::vector<TraceEntry> t{{0, 1.5, 1.5, 3.0, 0.0, 0, 0.01}, {1, 2.25, 2.25, 1.0, 0.1, 2, 0.02}};
  const auto tb = io::trace_from_json(io::Json::parse(io::trace_to_json(t, "iteration limit").dump()));
  REQUIRE(tb.size() == 2);
  CHECK(tb[1].line_search == 2);
  CHECK(tb[1].value == 2.25);

  io::Report r;
  r.method = "dadp";
  r.lower_bound = 0.1 + 0.2;
  r.upper_bound = Interval{10.0 / 3, 3.0, 3.5, 0.7, 200};
  r.evaluation = Interval{1e9 / 7, 1e8, 2e8, 3e7, 5};
  r.ens_gwh = 1.0 / 3;
  r.outliers = 2;
  CHECK(io::report_from_json(io::Json::parse(io::report_to_json(r).dump(2))) == r);
  io::Json j = io::report_to_json(r);
  j["schema_version"] = 0;
  CHECK_THROWS_WITH_AS(io::report_from_json(j), doctest::Contains("schema_version"), io::IoError);
  j = io::report_to_json(r);
  j["kind"] = "trace";
  CHECK_THROWS_AS(io::report_from_json(j), io::IoError);
}

TEST_CASE("io: numbers and gap") {
  CHECK(io::gap_percent(100, 101) == doctest::Approx(1.0));
  for (double v : {0.1, 1.0 / 3, 1e-300, 123456789.125, -2.5}) CHECK(std::strtod(io::format_number(v).c_str(), nullptr) == v);
  CHECK(io::format_number(2.0) == "2");
}
