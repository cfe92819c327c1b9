#include "ccdispatch/grid.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ccd {

using nlohmann::json;

int GridCase::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].is_slack) return int(i);
  throw std::runtime_error("grid case has no slack bus");
}

double GridCase::total_demand() const {
  return std::accumulate(loads.begin(), loads.end(), 0.0,
                         [](double s, const Load& l) { return s + l.demand; });
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

void check_connected(const GridCase& c) {
  const int nb = int(c.buses.size());
  std::vector<std::vector<int>> adj(nb);
  for (const Line& l : c.lines) {
    adj[l.from_bus].push_back(l.to_bus);
    adj[l.to_bus].push_back(l.from_bus);
  }
  std::vector<char> seen(nb, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int b = stack.back();
    stack.pop_back();
    for (int nb2 : adj[b])
      if (!seen[nb2]) {
        seen[nb2] = 1;
        ++count;
        stack.push_back(nb2);
      }
  }
  require(count == nb, "disconnected network");
}

}  // namespace

void GridCase::validate() const {
  require(!buses.empty(), "case has no buses");
  int slack_count = 0;
  for (const Bus& b : buses) slack_count += b.is_slack ? 1 : 0;
  require(slack_count != 0, "no slack bus");
  require(slack_count == 1, "multiple slack buses");

  const int nb = int(buses.size());
  auto in_range = [nb](int b) { return b >= 0 && b < nb; };

  require(!lines.empty(), "case has no lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Line& l = lines[i];
    require(in_range(l.from_bus) && in_range(l.to_bus),
            "line " + std::to_string(i) + ": bus reference out of range");
    require(l.from_bus != l.to_bus,
            "line " + std::to_string(i) + ": from == to");
    require(l.reactance > 0.0,
            "line " + std::to_string(i) + ": reactance must be > 0");
    require(l.capacity > 0.0,
            "line " + std::to_string(i) + ": capacity must be > 0");
  }
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const Generator& g = generators[i];
    require(in_range(g.bus),
            "generator " + std::to_string(i) + ": bus reference out of range");
    require(g.g_min <= g.g_max,
            "generator " + std::to_string(i) + ": g_min > g_max");
    require(g.ramp_down <= 0.0 && 0.0 <= g.ramp_up,
            "generator " + std::to_string(i) +
                ": requires ramp_down <= 0 <= ramp_up");
  }
  for (std::size_t i = 0; i < wind_farms.size(); ++i) {
    const WindFarm& w = wind_farms[i];
    require(in_range(w.bus),
            "wind farm " + std::to_string(i) + ": bus reference out of range");
    require(w.capacity > 0.0,
            "wind farm " + std::to_string(i) + ": capacity must be > 0");
    require(w.forecast >= 0.0 && w.forecast <= w.capacity,
            "wind farm " + std::to_string(i) +
                ": forecast outside [0, capacity]");
    require(!w.region.empty(),
            "wind farm " + std::to_string(i) + ": empty region key");
  }
  for (std::size_t i = 0; i < loads.size(); ++i) {
    require(in_range(loads[i].bus),
            "load " + std::to_string(i) + ": bus reference out of range");
    require(loads[i].demand >= 0.0,
            "load " + std::to_string(i) + ": demand must be >= 0");
  }

  check_connected(*this);

  double gmax_total = 0.0, wind_total = 0.0;
  for (const Generator& g : generators) gmax_total += g.g_max;
  for (const WindFarm& w : wind_farms) wind_total += w.capacity;
  require(gmax_total + wind_total >= total_demand(),
          "installed capacity below total demand");
}

namespace {

double get_num(const json& o, const char* field, const std::string& ctx) {
  if (!o.contains(field))
    throw std::runtime_error(ctx + ": missing field \"" + field + "\"");
  if (!o[field].is_number())
    throw std::runtime_error(ctx + ": field \"" + field + "\" not a number");
  return o[field].get<double>();
}

GridCase from_json(const json& j, const std::string& origin) {
  GridCase c;
  for (const char* key : {"buses", "lines", "generators", "wind_farms", "loads"})
    if (!j.contains(key) || !j[key].is_array())
      throw std::runtime_error(origin + ": missing top-level array \"" +
                               std::string(key) + "\"");

  // First pass over buses: collect ids, remap to contiguous 0-based.
  std::map<int, int> id_to_index;
  int n = 0;
  for (const json& b : j["buses"]) {
    const std::string ctx = origin + ": buses[" + std::to_string(n) + "]";
    Bus bus;
    bus.id = int(get_num(b, "id", ctx));
    bus.is_slack = b.value("is_slack", false);
    if (id_to_index.count(bus.id))
      throw std::runtime_error(ctx + ": duplicate bus id " +
                               std::to_string(bus.id));
    id_to_index[bus.id] = n++;
    c.buses.push_back(bus);
  }
  if (c.buses.empty()) throw std::runtime_error(origin + ": no buses");
  const int lowest = id_to_index.begin()->first;
  if (lowest != 0 && lowest != 1)
    throw std::runtime_error(origin + ": bus ids must start at 0 or 1");
  if (id_to_index.rbegin()->first - lowest + 1 != int(c.buses.size()))
    throw std::runtime_error(origin + ": bus ids not contiguous");

  auto bus_index = [&](double id, const std::string& ctx) {
    auto it = id_to_index.find(int(id));
    if (it == id_to_index.end())
      throw std::runtime_error(ctx + ": unknown bus id " +
                               std::to_string(int(id)));
    return it->second;
  };

  int k = 0;
  for (const json& l : j["lines"]) {
    const std::string ctx = origin + ": lines[" + std::to_string(k++) + "]";
    Line line;
    line.from_bus = bus_index(get_num(l, "from_bus", ctx), ctx);
    line.to_bus = bus_index(get_num(l, "to_bus", ctx), ctx);
    line.reactance = get_num(l, "reactance", ctx);
    line.capacity = get_num(l, "capacity", ctx);
    c.lines.push_back(line);
  }
  k = 0;
  for (const json& g : j["generators"]) {
    const std::string ctx = origin + ": generators[" + std::to_string(k++) + "]";
    Generator gen;
    gen.bus = bus_index(get_num(g, "bus", ctx), ctx);
    gen.g_min = get_num(g, "g_min", ctx);
    gen.g_max = get_num(g, "g_max", ctx);
    gen.cost = get_num(g, "cost", ctx);
    gen.ramp_down = get_num(g, "ramp_down", ctx);
    gen.ramp_up = get_num(g, "ramp_up", ctx);
    c.generators.push_back(gen);
  }
  k = 0;
  for (const json& w : j["wind_farms"]) {
    const std::string ctx = origin + ": wind_farms[" + std::to_string(k++) + "]";
    WindFarm farm;
    farm.bus = bus_index(get_num(w, "bus", ctx), ctx);
    farm.capacity = get_num(w, "capacity", ctx);
    if (!w.contains("region") || !w["region"].is_string())
      throw std::runtime_error(ctx + ": missing string field \"region\"");
    farm.region = w["region"].get<std::string>();
    farm.forecast = w.contains("forecast") ? get_num(w, "forecast", ctx) : 0.0;
    c.wind_farms.push_back(farm);
  }
  k = 0;
  for (const json& l : j["loads"]) {
    const std::string ctx = origin + ": loads[" + std::to_string(k++) + "]";
    Load load;
    load.bus = bus_index(get_num(l, "bus", ctx), ctx);
    load.demand = get_num(l, "demand", ctx);
    c.loads.push_back(load);
  }

  // Default slack: lowest-id bus (index 0 after the contiguity check).
  bool any_slack = false;
  for (const Bus& b : c.buses) any_slack = any_slack || b.is_slack;
  if (!any_slack) c.buses[0].is_slack = true;

  c.validate();
  return c;
}

}  // namespace

GridCase parse_case(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": JSON parse error: " + e.what());
  }
  return from_json(j, origin);
}

GridCase load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open case file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str(), path);
}

}  // namespace ccd
