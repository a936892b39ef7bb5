#include "shapetest/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace shapetest {

namespace {

Pmf finish_pmf(std::vector<double> mass, std::vector<std::size_t> dims, bool renormalize) {
  if (renormalize) return renormalized(std::move(mass), std::move(dims));
  return make_pmf(std::move(mass), std::move(dims));
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool looks_like_json(const std::string& content) {
  auto pos = content.find_first_not_of(" \t\r\n");
  return pos != std::string::npos && content[pos] == '{';
}

double json_number(double x) { return std::isfinite(x) ? x : 0.0; }

}  // namespace

Json pmf_to_json(const Pmf& p) {
  Json j;
  if (!p.dims.empty()) j["dims"] = p.dims;
  j["mass"] = p.mass;
  return j;
}

Pmf pmf_from_json(const Json& j, bool renormalize) {
  if (!j.is_object() || !j.contains("mass")) throw std::invalid_argument("pmf json: missing \"mass\"");
  auto mass = j.at("mass").get<std::vector<double>>();
  std::vector<std::size_t> dims;
  if (j.contains("dims")) dims = j.at("dims").get<std::vector<std::size_t>>();
  if (dims.size() == 1) dims.clear();
  return finish_pmf(std::move(mass), std::move(dims), renormalize);
}

std::string pmf_to_text(const Pmf& p) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (double v : p.mass) out << v << '\n';
  return out.str();
}

Pmf pmf_from_text(std::istream& in, bool renormalize) {
  std::vector<double> mass;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::size_t used = 0;
    double v = std::stod(line, &used);
    if (used != line.size()) throw std::invalid_argument("pmf text: bad line \"" + line + "\"");
    mass.push_back(v);
  }
  return finish_pmf(std::move(mass), {}, renormalize);
}

Pmf parse_pmf(const std::string& content, bool renormalize) {
  if (looks_like_json(content)) return pmf_from_json(Json::parse(content), renormalize);
  std::istringstream in(content);
  return pmf_from_text(in, renormalize);
}

Pmf load_pmf(const std::string& path, bool renormalize) { return parse_pmf(read_file(path), renormalize); }

Json counts_to_json(const SampleCounts& c) {
  Json j;
  j["m"] = c.m_actual;
  if (c.m_nominal != c.m_actual) j["m_nominal"] = c.m_nominal;
  if (!c.dims.empty()) j["dims"] = c.dims;
  j["counts"] = c.counts;
  return j;
}

SampleCounts counts_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("counts")) throw std::invalid_argument("counts json: missing \"counts\"");
  std::vector<std::size_t> dims;
  if (j.contains("dims")) dims = j.at("dims").get<std::vector<std::size_t>>();
  if (dims.size() == 1) dims.clear();
  SampleCounts c = make_counts(j.at("counts").get<std::vector<std::uint64_t>>(), std::move(dims));
  if (j.contains("m") && j.at("m").get<std::uint64_t>() != c.m_actual)
    throw std::invalid_argument("counts json: \"m\" disagrees with the counts");
  if (j.contains("m_nominal")) c.m_nominal = j.at("m_nominal").get<std::uint64_t>();
  return c;
}

SampleCounts parse_counts(const std::string& content) {
  if (looks_like_json(content)) return counts_from_json(Json::parse(content));
  std::istringstream in(content);
  std::vector<std::uint64_t> counts;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::size_t used = 0;
    auto v = std::stoull(line, &used);
    if (used != line.size() || line[0] == '-') throw std::invalid_argument("counts text: bad line \"" + line + "\"");
    counts.push_back(v);
  }
  return make_counts(std::move(counts));
}

SampleCounts load_counts(const std::string& path) { return parse_counts(read_file(path)); }

Json partition_to_json(const IntervalPartition& part) {
  auto axis = [](const std::vector<Interval>& cells) {
    Json a = Json::array();
    for (const auto& c : cells) a.push_back({c.lo, c.hi});
    return a;
  };
  Json j;
  j["dims"] = part.dims;
  if (part.num_axes() == 1) {
    j["cells"] = axis(part.axis_cells[0]);
  } else {
    j["cells"] = Json::array();
    for (const auto& cells : part.axis_cells) j["cells"].push_back(axis(cells));
  }
  return j;
}

IntervalPartition partition_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("cells")) throw std::invalid_argument("partition json: missing \"cells\"");
  auto parse_axis = [](const Json& a) {
    std::vector<Interval> cells;
    for (const auto& c : a) {
      auto r = c.get<std::vector<std::size_t>>();
      if (r.size() != 2) throw std::invalid_argument("partition json: cells are [lo, hi] pairs");
      cells.push_back({r[0], r[1]});
    }
    return cells;
  };
  const Json& cells = j.at("cells");
  bool grid = !cells.empty() && cells[0].is_array() && !cells[0].empty() && cells[0][0].is_array();
  std::vector<std::size_t> dims;
  if (j.contains("dims")) dims = j.at("dims").get<std::vector<std::size_t>>();
  if (!grid) {
    auto axis = parse_axis(cells);
    if (axis.empty()) throw std::invalid_argument("partition json: no cells");
    std::size_t n = dims.empty() ? axis.back().hi + 1 : dims.at(0);
    return partition_from_cells(n, std::move(axis));
  }
  IntervalPartition part;
  for (const auto& a : cells) part.axis_cells.push_back(parse_axis(a));
  if (dims.size() != part.axis_cells.size()) throw std::invalid_argument("partition json: grid needs \"dims\" per axis");
  part.dims = dims;
  std::size_t covered_axes = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    std::size_t covered = 0;
    for (const auto& c : part.axis_cells[a]) covered += c.size();
    covered_axes += covered == dims[a];
  }
  part.covers = covered_axes == dims.size();
  validate(part);
  return part;
}

Json verdict_to_json(const TestVerdict& v) {
  Json j;
  j["decision"] = v.accepted() ? "Accept" : "Reject";
  j["statistic"] = std::isfinite(v.statistic) ? Json(v.statistic) : Json(nullptr);
  j["threshold"] = std::isfinite(v.threshold) ? Json(v.threshold) : Json(nullptr);
  j["excluded_mass"] = json_number(v.excluded_mass);
  j["stage"] = v.stage;
  Json d = Json::object();
  for (const auto& [k, x] : v.detail) d[k] = std::isfinite(x) ? Json(x) : Json(nullptr);
  j["detail"] = d;
  return j;
}

std::string verdict_to_text(const TestVerdict& v) {
  std::ostringstream out;
  out << (v.accepted() ? "Accept" : "Reject") << " stage=" << v.stage;
  if (std::isfinite(v.statistic)) out << " statistic=" << v.statistic << " threshold=" << v.threshold;
  out << " excluded_mass=" << v.excluded_mass << '\n';
  return out.str();
}

Json outcome_to_json(const LearnOutcome& o) {
  Json j;
  j["rejected"] = o.rejected;
  j["q"] = o.rejected ? Json(nullptr) : pmf_to_json(o.q);
  j["support"] = o.support;
  Json d = Json::object();
  for (const auto& [k, x] : o.detail) d[k] = std::isfinite(x) ? Json(x) : Json(nullptr);
  j["detail"] = d;
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace shapetest
