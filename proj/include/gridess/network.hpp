#pragma once

#include <string>
#include <vector>

namespace gridess {

struct Bus {
  int id = 0;                // 0-based internal index
  int external_id = 0;       // id as written in the case file
  double nominal_demand = 0.0;  // p.u.
  bool has_battery = false;
};

struct Generator {
  int bus = 0;
  double g_min = 0.0;      // p.u.
  double g_max = 0.0;      // p.u.
  double cost_coeff = 0.0; // linear cost per p.u.
};

struct Line {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;  // 1 / BR_X, p.u.
  double capacity = 0.0;     // p.u., both directions
};

struct BatteryConfig {
  double e_min = 0.0;
  double e_max = 1.0;
  double e0 = 0.0;
  double eta_c = 0.95;
  double eta_d = 0.95;
  double ec_min = 0.0;
  double ec_max = 0.95;
  double ed_min = 0.0;
  double ed_max = 0.95;

  double round_trip() const { return eta_c * eta_d; }
  void validate() const;  // throws std::invalid_argument on bad data
};

struct DemandScenario {
  int horizon = 0;                         // T
  std::vector<std::vector<double>> values; // [t][bus], p.u.

  double at(int t, int bus) const { return values[t][bus]; }
  int num_buses() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }
};

struct Network {
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  BatteryConfig battery;
  double base_mva = 100.0;
  std::string name;

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_lines() const { return static_cast<int>(lines.size()); }

  std::vector<int> battery_buses() const {
    std::vector<int> out;
    for (const auto& b : buses)
      if (b.has_battery) out.push_back(b.id);
    return out;
  }

  /// Total installed generation capacity per bus (p.u.).
  std::vector<double> generation_capacity_by_bus() const;

  /// Clears existing placements and marks the given buses.
  void set_battery_buses(const std::vector<int>& ids);

  /// Marks the `count` buses with the largest generation capacity,
  /// ties broken by lower bus index.
  void place_batteries_at_largest_generators(int count);

  /// One id per connected component: the lowest-indexed bus reachable.
  std::vector<int> component_of_bus() const;

  void validate() const;  // throws std::invalid_argument on bad topology
};

/// Size-dependent rescale of the storage and rate limits: networks below
/// 73 buses get 1/5 of the reference limits, mid-size networks keep them,
/// 163..300 buses get x2.5 and larger networks x5.
BatteryConfig scale_battery(const BatteryConfig& config, int n_buses);

}  // namespace gridess
