#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "fixtures.hpp"
#include "gdadp/scenarios.hpp"

using namespace gdadp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gdadp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SystemModel one_node(int weeks, int hours) {
  return SystemModel({weeks, hours}, {fixtures::storage_node("a", 10, 5, 2)}, {});
}

}  // namespace

TEST_CASE("scenarios: load a single small chronicle") {
  const auto dir = temp_dir("load1");
  const auto file = dir / "c.csv";
  {
    std::ofstream out(file);
    out << "chronicle,node,week,hour,net_demand,availability,inflow\n";
    for (int s = 0; s < 2; ++s)
      for (int h = 0; h < 2; ++h) out << "y1,a," << s << ',' << h << ",3,0.5,1\n";
  }
  const SystemModel m = one_node(2, 2);
  const ScenarioSet set = load_chronicles(file, m);
  CHECK(set.size() == 1);
  CHECK(set.weight() == 1.0);
  CHECK(set.week(0, 1).nodes[0].availability[1] == 0.5);
}

TEST_CASE("scenarios: availability out of range is rejected with its location") {
  const auto dir = temp_dir("bad");
  const auto file = dir / "c.csv";
  {
    std::ofstream out(file);
    out << "chronicle,node,week,hour,net_demand,availability,inflow\n";
    for (int s = 0; s < 2; ++s)
      for (int h = 0; h < 2; ++h) out << "y1,a," << s << ',' << h << ",3," << (s == 1 && h == 0 ? 1.2 : 1.0) << ",1\n";
  }
  const SystemModel m = one_node(2, 2);
  try {
    load_chronicles(file, m);
    FAIL("expected rejection");
  } catch (const ScenarioError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("node 'a'") != std::string::npos);
    CHECK(msg.find("week 1") != std::string::npos);
    CHECK(msg.find("hour 0") != std::string::npos);
    CHECK(msg.find("availability") != std::string::npos);
  }
}

TEST_CASE("scenarios: missing series and wrong horizon are rejected") {
  const auto dir = temp_dir("missing");
  {
    std::ofstream out(dir / "c.csv");
    out << "chronicle,node,week,hour,net_demand,availability,inflow\n";
    out << "y1,a,0,0,3,1,1\n";
  }
  CHECK_THROWS_AS(load_chronicles(dir / "c.csv", one_node(1, 2)), ScenarioError);
  {
    std::ofstream out(dir / "c.csv");
    out << "chronicle,node,week,hour,net_demand,availability,inflow\n";
    out << "y1,a,3,0,3,1,1\n";
  }
  CHECK_THROWS_AS(load_chronicles(dir / "c.csv", one_node(1, 1)), ScenarioError);
}

TEST_CASE("scenarios: round trip and directory form give uniform weights") {
  const SystemModel m = fixtures::two_node(3, 2);
  const ScenarioSet set = fixtures::random_set(m, 10, 1);
  const auto dir = temp_dir("roundtrip");
  write_chronicles(dir / "all.csv", set, m);
  const ScenarioSet back = load_chronicles(dir / "all.csv", m);
  REQUIRE(back.size() == 10);
  CHECK(back.weight() == doctest::Approx(0.1));
  CHECK(back[4].id == "c4");
  CHECK(back.week(7, 2).nodes[1].net_demand == set.week(7, 2).nodes[1].net_demand);

  const auto per = temp_dir("perfile");
  for (std::size_t c = 0; c < set.size(); ++c) {
    ScenarioSet single({set[c]}, ScenarioRole::Training);
    write_chronicles(per / (set[c].id + ".csv"), single, m);
  }
  const ScenarioSet from_dir = load_chronicles(per, m);
  CHECK(from_dir.size() == 10);
}

TEST_CASE("scenarios: weekly expectation") {
  CHECK(weekly_expectation(std::vector<double>{1, 3}) == 2.0);
  CHECK(weekly_expectation(std::vector<double>{5}) == 5.0);
  CHECK(weekly_expectation(std::vector<double>{0, 0, 9}) == 3.0);
  CHECK_THROWS_AS(weekly_expectation(std::vector<double>{}), ScenarioError);
  // linear and permutation invariant
  std::vector<double> a{1.5, -2, 7, 4}, b{3, 0.25, -1, 2}, ab(4), perm{7, 4, -2, 1.5};
  for (int i = 0; i < 4; ++i) ab[i] = 2 * a[i] - 3 * b[i];
  CHECK(weekly_expectation(ab) == doctest::Approx(2 * weekly_expectation(a) - 3 * weekly_expectation(b)));
  CHECK(weekly_expectation(perm) == doctest::Approx(weekly_expectation(a)));
}

TEST_CASE("scenarios: product sampling") {
  const SystemModel m = fixtures::two_node(3, 2);
  {
    const ScenarioSet one = fixtures::random_set(m, 1, 2);
    std::mt19937_64 rng(99);
    const YearChronicle y = sample_product_chronicle(rng, one);
    for (int s = 0; s < 3; ++s) CHECK(y.weeks[s].nodes[0].net_demand == one.week(0, s).nodes[0].net_demand);
  }
  const ScenarioSet two = fixtures::random_set(m, 2, 3);
  std::mt19937_64 rng(17), replay(17);
  const YearChronicle y = sample_product_chronicle(rng, two);
  std::uniform_int_distribution<int> pick(0, 1);
  for (int s = 0; s < 3; ++s) {
    const int c = pick(replay);
    CHECK(y.weeks[s].nodes[1].net_demand == two.week(c, s).nodes[1].net_demand);
    validate_chronicle(y, m);
  }
  std::mt19937_64 r1(5), r2(5);
  CHECK(sample_product_indices(r1, 7, 52) == sample_product_indices(r2, 7, 52));
}

TEST_CASE("scenarios: sampling frequencies converge") {
  std::mt19937_64 rng(2024);
  std::vector<int> counts(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_product_indices(rng, 4, 1)[0]];
  for (int c : counts) CHECK(std::abs(c / double(draws) - 0.25) <= 0.01);
}

TEST_CASE("scenarios: product support size") {
  auto set_of = [](int chronicles, int weeks) {
    const SystemModel m({weeks, 1}, {fixtures::plain_node("b")}, {});
    return fixtures::random_set(m, chronicles, 1);
  };
  boost::multiprecision::cpp_int ten52("10000000000000000000000000000000000000000000000000000");
  CHECK(count_product_support(set_of(10, 52)) == ten52);
  CHECK(count_product_support(set_of(1, 52)) == 1);
  CHECK(count_product_support(set_of(3, 2)) == 9);
}
