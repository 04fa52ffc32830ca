#include "gridess/demand.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gridess {

std::vector<double> default_daily_profile() {
  return {1.00, 0.96, 0.93, 0.91, 0.92, 0.97, 1.06, 1.16,
          1.22, 1.24, 1.23, 1.21, 1.20, 1.21, 1.23, 1.27,
          1.34, 1.41, 1.44, 1.41, 1.34, 1.24, 1.13, 1.05};
}

std::vector<double> load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile: " + path);
  std::vector<double> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double v = 0.0;
    try {
      v = std::stod(line);
    } catch (const std::exception&) {
      throw std::runtime_error("profile: bad value on line " +
                               std::to_string(line_no));
    }
    if (v <= 0.0)
      throw std::runtime_error("profile: entries must be positive (line " +
                               std::to_string(line_no) + ")");
    out.push_back(v);
  }
  if (out.empty()) throw std::runtime_error("profile: no entries in " + path);
  return out;
}

namespace {

// Nominal demand shaped toward the target capacity ratio. The per-bus
// distribution is preserved; the level is set so that total demand equals
// capacity_ratio times total generation capacity.
std::vector<double> shaped_nominal(const Network& net, double capacity_ratio) {
  std::vector<double> d(net.num_buses(), 0.0);
  double total_demand = 0.0, total_cap = 0.0;
  for (const auto& b : net.buses) total_demand += b.nominal_demand;
  for (const auto& g : net.generators) total_cap += g.g_max;
  double alpha = 1.0;
  if (total_demand > 0.0 && total_cap > 0.0 && capacity_ratio > 0.0)
    alpha = capacity_ratio * total_cap / total_demand;
  for (const auto& b : net.buses) d[b.id] = alpha * b.nominal_demand;
  return d;
}

}  // namespace

DemandScenario nominal_demand(const Network& network,
                              const std::vector<double>& profile,
                              double capacity_ratio) {
  if (profile.empty()) throw std::invalid_argument("empty demand profile");
  for (double p : profile)
    if (!(p > 0.0)) throw std::invalid_argument("profile entries must be positive");
  std::vector<double> base = shaped_nominal(network, capacity_ratio);
  DemandScenario s;
  s.horizon = static_cast<int>(profile.size());
  s.values.assign(s.horizon, std::vector<double>(network.num_buses(), 0.0));
  for (int t = 0; t < s.horizon; ++t) {
    double ratio = profile[t] / profile[0];
    for (int i = 0; i < network.num_buses(); ++i) s.values[t][i] = base[i] * ratio;
  }
  return s;
}

std::vector<DemandScenario> generate_demand(const Network& network,
                                            const std::vector<double>& profile,
                                            const DemandOptions& options) {
  if (options.count <= 0)
    throw std::invalid_argument("scenario count must be positive");
  if (options.sigma_hat < 0)
    throw std::invalid_argument("sigma_hat must be nonnegative");
  DemandScenario nominal = nominal_demand(network, profile, options.capacity_ratio);
  std::vector<DemandScenario> out;
  out.reserve(options.count);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int j = 0; j < options.count; ++j) {
    DemandScenario s = nominal;
    if (options.sigma_hat > 0.0) {
      for (auto& row : s.values) {
        for (double& v : row) {
          double noise = gauss(rng) * options.sigma_hat * v;
          v = std::max(0.0, v + noise);
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string scenario_to_csv(const DemandScenario& scenario) {
  std::ostringstream out;
  out << "t,bus,demand\n";
  char buf[64];
  for (int t = 0; t < scenario.horizon; ++t) {
    for (int i = 0; i < scenario.num_buses(); ++i) {
      auto res = std::to_chars(buf, buf + sizeof(buf), scenario.values[t][i]);
      out << (t + 1) << ',' << i << ',' << std::string_view(buf, res.ptr - buf)
          << '\n';
    }
  }
  return out.str();
}

DemandScenario scenario_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,bus,demand", 0) != 0)
    throw std::runtime_error("scenario csv: missing t,bus,demand header");
  std::vector<std::tuple<int, int, double>> cells;
  int max_t = 0, max_bus = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string a, b, c;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') ||
        !std::getline(fields, c))
      throw std::runtime_error("scenario csv: bad row on line " +
                               std::to_string(line_no));
    int t = std::stoi(a), bus = std::stoi(b);
    double v = std::stod(c);
    if (t < 1 || bus < 0 || v < 0)
      throw std::runtime_error("scenario csv: bad values on line " +
                               std::to_string(line_no));
    cells.emplace_back(t, bus, v);
    max_t = std::max(max_t, t);
    max_bus = std::max(max_bus, bus);
  }
  DemandScenario s;
  s.horizon = max_t;
  s.values.assign(max_t, std::vector<double>(max_bus + 1, 0.0));
  for (auto& [t, bus, v] : cells) s.values[t - 1][bus] = v;
  return s;
}

DemandScenario scenario_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario csv: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_csv(ss.str());
}

}  // namespace gridess
