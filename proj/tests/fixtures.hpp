#pragma once

// Small two-bus study cases used across the test suites. All of them share
// the same grid skeleton (two buses joined by one line, one generator per
// bus with output in [2,4], free generator cost) and differ in battery
// configuration and demand. Ohm's law is left out; the line only carries a
// capacity limit.

#include <cmath>
#include <vector>

#include "gridess/network.hpp"
#include "gridess/opf.hpp"

namespace fixtures {

inline gridess::Network two_bus(const gridess::BatteryConfig& bat,
                                double line_cap = 4.0) {
  gridess::Network net;
  net.name = "twobus";
  net.base_mva = 1.0;
  for (int i = 0; i < 2; ++i) {
    gridess::Bus b;
    b.id = i;
    b.external_id = i + 1;
    net.buses.push_back(b);
    net.generators.push_back({i, 2.0, 4.0, 0.0});
  }
  net.lines.push_back({0, 1, 1.0, line_cap});
  net.battery = bat;
  net.buses[1].has_battery = true;
  return net;
}

inline gridess::DemandScenario demand(std::vector<std::vector<double>> rows) {
  gridess::DemandScenario s;
  s.horizon = static_cast<int>(rows.size());
  s.values = std::move(rows);
  return s;
}

// Positive minimum charge/discharge rates: the LP relaxation is strictly
// below the regularized MIP for tau in (0, 1/2].
inline gridess::Network ex1_network(double tau) {
  gridess::BatteryConfig b;
  b.e_min = 0.0;
  b.e_max = 4.0;
  b.e0 = 0.0;
  b.eta_c = b.eta_d = 0.5;
  b.ec_min = b.ed_min = tau;
  b.ec_max = b.ed_max = 2.0;
  return two_bus(b);
}
inline gridess::DemandScenario ex1_demand() {
  return demand({{2.0, 4.0}, {6.0, 4.0}});
}

// Under-penalized regularizer: fractional charge/discharge pays off.
inline gridess::Network ex2_network() {
  gridess::BatteryConfig b;
  b.e_min = 0.0;
  b.e_max = 6.0;
  b.e0 = 6.0;
  b.eta_c = b.eta_d = 1.0 / std::sqrt(3.0);
  b.ec_min = b.ed_min = 0.0;
  b.ec_max = b.ed_max = 1.0;
  return two_bus(b);
}
inline gridess::DemandScenario ex2_demand() {
  return demand({{1.0, 2.0}, {4.0, 8.0}});
}

// Lossless battery with a deep reserve; used below unit penalties.
inline gridess::Network ex3_network() {
  gridess::BatteryConfig b;
  b.e_min = 0.0;
  b.e_max = 20.0;
  b.e0 = 20.0;
  b.eta_c = b.eta_d = 1.0;
  b.ec_min = b.ed_min = 0.0;
  b.ec_max = b.ed_max = 2.0;
  return two_bus(b);
}
inline gridess::DemandScenario ex3_demand() {
  return demand({{5.0, 5.0}, {5.0, 5.0}});
}

// Very lossy battery: the exact model discharges into excess power to make
// room for later surplus.
inline gridess::Network ex4_network() {
  gridess::BatteryConfig b;
  b.e_min = 0.0;
  b.e_max = 4.0;
  b.e0 = 4.0;
  b.eta_c = b.eta_d = 0.1;
  b.ec_min = b.ed_min = 0.0;
  b.ec_max = b.ed_max = 2.0;
  return two_bus(b);
}
inline gridess::DemandScenario ex4_demand() {
  return demand({{2.0, 2.0}, {1.0, 1.0}, {2.0, 1.0}});
}

// Exactness study case: unique second-best objective gap of 1.8.
inline gridess::Network ex5_network() {
  gridess::BatteryConfig b;
  b.e_min = 0.0;
  b.e_max = 4.0;
  b.e0 = 2.0;
  b.eta_c = b.eta_d = 0.9;
  b.ec_min = b.ed_min = 0.0;
  b.ec_max = b.ed_max = 2.0;
  return two_bus(b);
}
inline gridess::DemandScenario ex5_demand() {
  return demand({{10.0, 4.0}, {4.0, 4.0}});
}

// Sweep case with a tight line (capacity 1) and configurable efficiency.
inline gridess::Network ex6_network(double eta) {
  gridess::BatteryConfig b;
  b.e_min = 0.0;
  b.e_max = 6.0;
  b.e0 = 0.0;
  b.eta_c = b.eta_d = eta;
  b.ec_min = b.ed_min = 0.0;
  b.ec_max = b.ed_max = 1.0;
  return two_bus(b, 1.0);
}
inline gridess::DemandScenario ex6_demand() {
  return demand({{5.0, 1.0}, {8.0, 4.0}});
}

inline gridess::ModelVariant variant(gridess::OpfVariant tag) {
  return {tag, /*include_ohms_law=*/false};
}

}  // namespace fixtures
