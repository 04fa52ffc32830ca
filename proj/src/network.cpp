#include "gridess/network.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gridess {

void BatteryConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("battery config: " + what);
  };
  if (!(0.0 <= e_min && e_min <= e_max)) fail("need 0 <= e_min <= e_max");
  if (!(e_min <= e0 && e0 <= e_max)) fail("initial state-of-charge outside [e_min, e_max]");
  if (!(0.0 <= ec_min && ec_min <= ec_max)) fail("need 0 <= ec_min <= ec_max");
  if (!(0.0 <= ed_min && ed_min <= ed_max)) fail("need 0 <= ed_min <= ed_max");
  if (!(eta_c > 0.0 && eta_c <= 1.0)) fail("eta_c must be in (0,1]");
  if (!(eta_d > 0.0 && eta_d <= 1.0)) fail("eta_d must be in (0,1]");
  if (eta_c > 1.0 / eta_d + 1e-12) fail("eta_c <= 1/eta_d required");
}

std::vector<double> Network::generation_capacity_by_bus() const {
  std::vector<double> cap(buses.size(), 0.0);
  for (const auto& g : generators) cap[g.bus] += g.g_max;
  return cap;
}

void Network::set_battery_buses(const std::vector<int>& ids) {
  for (auto& b : buses) b.has_battery = false;
  for (int id : ids) {
    if (id < 0 || id >= num_buses())
      throw std::invalid_argument("battery bus index out of range: " +
                                  std::to_string(id));
    buses[id].has_battery = true;
  }
}

void Network::place_batteries_at_largest_generators(int count) {
  count = std::min(count, num_buses());
  std::vector<double> cap = generation_capacity_by_bus();
  std::vector<int> order(buses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return cap[a] > cap[b]; });
  order.resize(std::max(count, 0));
  set_battery_buses(order);
}

std::vector<int> Network::component_of_bus() const {
  std::vector<int> parent(buses.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  for (const auto& l : lines) {
    int a = find(l.from), b = find(l.to);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> comp(buses.size());
  for (int i = 0; i < num_buses(); ++i) comp[i] = find(i);
  return comp;
}

void Network::validate() const {
  for (const auto& l : lines) {
    if (l.from < 0 || l.from >= num_buses() || l.to < 0 || l.to >= num_buses())
      throw std::invalid_argument("line endpoint references unknown bus");
    if (l.from == l.to)
      throw std::invalid_argument("line endpoints must differ");
    if (l.capacity < 0)
      throw std::invalid_argument("line capacity must be nonnegative");
  }
  for (const auto& g : generators) {
    if (g.bus < 0 || g.bus >= num_buses())
      throw std::invalid_argument("generator references unknown bus");
    if (!(0.0 <= g.g_min && g.g_min <= g.g_max))
      throw std::invalid_argument("need 0 <= g_min <= g_max");
  }
  battery.validate();
}

BatteryConfig scale_battery(const BatteryConfig& config, int n_buses) {
  double factor;
  if (n_buses < 73)
    factor = 0.2;
  else if (n_buses <= 162)
    factor = 1.0;
  else if (n_buses <= 300)
    factor = 2.5;
  else
    factor = 5.0;
  BatteryConfig out = config;
  out.e_max *= factor;
  out.ec_max *= factor;
  out.ed_max *= factor;
  out.e0 = std::min(out.e0, out.e_max);
  return out;
}

}  // namespace gridess
