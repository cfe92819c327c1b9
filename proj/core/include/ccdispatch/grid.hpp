#pragma once

#include <string>
#include <vector>

namespace ccd {

struct Bus {
  int id = 0;
  bool is_slack = false;
};

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;  // per-unit on a 100 MVA base
  double capacity = 0.0;   // MW; flow limits are [-capacity, +capacity]
};

struct Generator {
  int bus = 0;
  double g_min = 0.0;     // MW
  double g_max = 0.0;     // MW
  double cost = 0.0;      // $/MWh, linear coefficient
  double ramp_down = 0.0; // MW per interval, <= 0
  double ramp_up = 0.0;   // MW per interval, >= 0
};

struct WindFarm {
  int bus = 0;
  double capacity = 0.0;  // MW
  std::string region;     // key into scenario-store error columns
  double forecast = 0.0;  // MW, set per interval
};

struct Load {
  int bus = 0;
  double demand = 0.0;  // MW
};

/// Physical dispatch instance. Immutable after load; bus ids are remapped
/// to contiguous 0-based indices, device `bus` fields hold the index.
struct GridCase {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<WindFarm> wind_farms;
  std::vector<Load> loads;

  int slack_index() const;  // index into buses
  double total_demand() const;

  /// Checks every type and case invariant; throws std::runtime_error with
  /// the violated invariant named.
  void validate() const;
};

/// Parses a JSON case file (top-level arrays "buses", "lines", "generators",
/// "wind_farms", "loads") and returns a validated GridCase. Bus ids may be
/// 0- or 1-based but must be contiguous; if no bus is marked slack the
/// lowest-id bus is used.
GridCase load_case(const std::string& path);

/// Same, from an already-parsed JSON string (used by tests and tools).
GridCase parse_case(const std::string& json_text, const std::string& origin);

}  // namespace ccd
