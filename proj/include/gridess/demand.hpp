#pragma once

#include <string>
#include <vector>

#include "gridess/network.hpp"

namespace gridess {

/// Stand-in for the hourly benchmark curve: a smooth double-peak day,
/// normalized to start at 1.0. Override with load_profile when real data
/// is available.
std::vector<double> default_daily_profile();

/// Plain text profile: one positive decimal per line.
std::vector<double> load_profile(const std::string& path);

struct DemandOptions {
  double sigma_hat = 0.0;   // noise std as a fraction of the shaped demand
  std::uint64_t seed = 0;
  int count = 1;
  /// Target ratio of total demand to total generation capacity used when
  /// shaping the nominal load.
  double capacity_ratio = 0.8;
};

/// Shapes the nominal bus demand with the profile and draws `count` noisy
/// scenarios. Deterministic for a fixed seed; noise truncates at zero.
std::vector<DemandScenario> generate_demand(const Network& network,
                                            const std::vector<double>& profile,
                                            const DemandOptions& options);

/// The shaped nominal demand only (the sigma_hat = 0 scenario).
DemandScenario nominal_demand(const Network& network,
                              const std::vector<double>& profile,
                              double capacity_ratio = 0.8);

std::string scenario_to_csv(const DemandScenario& scenario);
DemandScenario scenario_from_csv(const std::string& csv);
DemandScenario scenario_from_csv_file(const std::string& path);

}  // namespace gridess
