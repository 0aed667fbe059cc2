#include "gdadp/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gdadp {

ScenarioSet::ScenarioSet(std::vector<YearChronicle> chronicles, ScenarioRole role)
    : chronicles_(std::move(chronicles)), role_(role) {
  if (chronicles_.empty()) throw ScenarioError("scenario set is empty");
  const std::size_t weeks = chronicles_.front().weeks.size();
  for (const auto& c : chronicles_) {
    if (c.weeks.size() != weeks) {
      throw ScenarioError("chronicle '" + c.id + "' spans " + std::to_string(c.weeks.size()) +
                          " weeks, expected " + std::to_string(weeks));
    }
  }
}

void validate_chronicle(const YearChronicle& chronicle, const SystemModel& model) {
  const std::string cid = "chronicle '" + chronicle.id + "'";
  if (static_cast<int>(chronicle.weeks.size()) != model.weeks()) {
    throw ScenarioError(cid + ": wrong horizon, " + std::to_string(chronicle.weeks.size()) + " weeks instead of " +
                        std::to_string(model.weeks()));
  }
  const auto hours = static_cast<std::size_t>(model.hours());
  for (int s = 0; s < model.weeks(); ++s) {
    const WeeklyChronicle& wk = chronicle.weeks[s];
    if (static_cast<int>(wk.nodes.size()) != model.num_nodes()) {
      throw ScenarioError(cid + " week " + std::to_string(s) + ": wrong node count");
    }
    for (int n = 0; n < model.num_nodes(); ++n) {
      const NodeWeekSeries& ser = wk.nodes[n];
      const std::string where = cid + " node '" + model.nodes()[n].id + "' week " + std::to_string(s);
      if (ser.net_demand.size() != hours || ser.availability.size() != hours || ser.inflow.size() != hours) {
        throw ScenarioError(where + ": missing node series (expected " + std::to_string(hours) + " hours)");
      }
      for (std::size_t h = 0; h < hours; ++h) {
        const std::string at = where + " hour " + std::to_string(h);
        if (!std::isfinite(ser.net_demand[h])) throw ScenarioError(at + ": non-finite net demand");
        const double av = ser.availability[h];
        if (!(av >= 0.0 && av <= 1.0)) {
          std::ostringstream s;
          s << at << ": availability " << av << " outside [0, 1]";
          throw ScenarioError(s.str());
        }
        if (!(ser.inflow[h] >= 0.0) || !std::isfinite(ser.inflow[h])) {
          throw ScenarioError(at + ": inflow must be finite and >= 0");
        }
      }
    }
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct RawRow {
  std::string chronicle;
  std::string node;
  int week;
  int hour;
  double net_demand, availability, inflow;
};

void read_csv(const std::filesystem::path& path, const std::string& default_chronicle, std::vector<RawRow>& rows) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open chronicle file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ScenarioError("'" + path.string() + "': empty file");
  const auto header = split_csv(line);
  std::map<std::string, int> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = static_cast<int>(i);
  for (const char* name : {"node", "week", "hour", "net_demand", "availability", "inflow"}) {
    if (!col.count(name)) throw ScenarioError("'" + path.string() + "': missing column '" + name + "'");
  }
  const bool has_chronicle = col.count("chronicle") > 0;
  if (!has_chronicle && default_chronicle.empty()) {
    throw ScenarioError("'" + path.string() + "': missing column 'chronicle'");
  }
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() < header.size()) {
      throw ScenarioError("'" + path.string() + "' line " + std::to_string(lineno) + ": too few fields");
    }
    try {
      RawRow r;
      r.chronicle = has_chronicle ? cells[col["chronicle"]] : default_chronicle;
      r.node = cells[col["node"]];
      r.week = std::stoi(cells[col["week"]]);
      r.hour = std::stoi(cells[col["hour"]]);
      r.net_demand = std::stod(cells[col["net_demand"]]);
      r.availability = std::stod(cells[col["availability"]]);
      r.inflow = std::stod(cells[col["inflow"]]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ScenarioError("'" + path.string() + "' line " + std::to_string(lineno) + ": malformed number");
    }
  }
}

}  // namespace

ScenarioSet load_chronicles(const std::filesystem::path& path, const SystemModel& model, ScenarioRole role) {
  std::vector<RawRow> rows;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(path)) {
      if (e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ScenarioError("no .csv chronicle files in '" + path.string() + "'");
    for (const auto& f : files) read_csv(f, f.stem().string(), rows);
  } else {
    read_csv(path, "", rows);
  }

  const int weeks = model.weeks();
  const int hours = model.hours();
  const double nan = std::nan("");
  std::vector<std::string> order;
  std::map<std::string, YearChronicle> by_id;
  for (const RawRow& r : rows) {
    auto it = by_id.find(r.chronicle);
    if (it == by_id.end()) {
      order.push_back(r.chronicle);
      YearChronicle c;
      c.id = r.chronicle;
      c.weeks.assign(weeks, WeeklyChronicle{std::vector<NodeWeekSeries>(
                                model.num_nodes(), NodeWeekSeries{std::vector<double>(hours, nan),
                                                                  std::vector<double>(hours, nan),
                                                                  std::vector<double>(hours, nan)})});
      it = by_id.emplace(r.chronicle, std::move(c)).first;
    }
    const std::string at = "chronicle '" + r.chronicle + "' node '" + r.node + "' week " + std::to_string(r.week) +
                           " hour " + std::to_string(r.hour);
    int n = -1;
    for (int k = 0; k < model.num_nodes(); ++k) {
      if (model.nodes()[k].id == r.node) n = k;
    }
    if (n < 0) throw ScenarioError(at + ": unknown node");
    if (r.week < 0 || r.week >= weeks) throw ScenarioError(at + ": wrong horizon, week out of range");
    if (r.hour < 0 || r.hour >= hours) throw ScenarioError(at + ": hour out of range");
    NodeWeekSeries& ser = it->second.weeks[r.week].nodes[n];
    ser.net_demand[r.hour] = r.net_demand;
    ser.availability[r.hour] = r.availability;
    ser.inflow[r.hour] = r.inflow;
  }
  std::vector<YearChronicle> chronicles;
  for (const auto& id : order) {
    YearChronicle& c = by_id[id];
    for (int s = 0; s < weeks; ++s) {
      for (int n = 0; n < model.num_nodes(); ++n) {
        const NodeWeekSeries& ser = c.weeks[s].nodes[n];
        for (int h = 0; h < hours; ++h) {
          if (std::isnan(ser.net_demand[h])) {
            throw ScenarioError("chronicle '" + id + "' node '" + model.nodes()[n].id + "' week " +
                                std::to_string(s) + " hour " + std::to_string(h) + ": missing node series");
          }
        }
      }
    }
    validate_chronicle(c, model);
    chronicles.push_back(std::move(c));
  }
  if (chronicles.empty()) throw ScenarioError("'" + path.string() + "': no chronicles");
  return ScenarioSet(std::move(chronicles), role);
}

void write_chronicles(const std::filesystem::path& path, const ScenarioSet& set, const SystemModel& model) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write '" + path.string() + "'");
  out << "chronicle,node,week,hour,net_demand,availability,inflow\n";
  // Shortest text that reads back to the same double.
  auto num = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
  };
  for (const auto& c : set.chronicles()) {
    for (int s = 0; s < model.weeks(); ++s) {
      for (int n = 0; n < model.num_nodes(); ++n) {
        const auto& ser = c.weeks[s].nodes[n];
        for (int h = 0; h < model.hours(); ++h) {
          out << c.id << ',' << model.nodes()[n].id << ',' << s << ',' << h << ',' << num(ser.net_demand[h]) << ','
              << num(ser.availability[h]) << ',' << num(ser.inflow[h]) << '\n';
        }
      }
    }
  }
}

double weekly_expectation(std::span<const double> values) {
  if (values.empty()) throw ScenarioError("weekly_expectation: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<int> sample_product_indices(std::mt19937_64& rng, std::size_t chronicles, int weeks) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(chronicles) - 1);
  std::vector<int> out(weeks);
  for (int s = 0; s < weeks; ++s) out[s] = pick(rng);
  return out;
}

YearChronicle sample_product_chronicle(std::mt19937_64& rng, const ScenarioSet& set) {
  const auto draws = sample_product_indices(rng, set.size(), set.weeks());
  YearChronicle out;
  out.id = "product";
  out.weeks.reserve(draws.size());
  for (int s = 0; s < static_cast<int>(draws.size()); ++s) {
    out.id += ":" + std::to_string(draws[s]);
    out.weeks.push_back(set.week(draws[s], s));
  }
  return out;
}

boost::multiprecision::cpp_int count_product_support(const ScenarioSet& set) {
  boost::multiprecision::cpp_int out = 1;
  for (int s = 0; s < set.weeks(); ++s) out *= set.size();
  return out;
}

}  // namespace gdadp
