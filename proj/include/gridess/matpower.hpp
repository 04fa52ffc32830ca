#pragma once

#include <stdexcept>
#include <string>

#include "gridess/network.hpp"

namespace gridess {

struct MatpowerOptions {
  /// Raise generator minima to g_max / 3 (PMIN kept when already larger).
  bool rescale_gen_min = false;
  /// Replacement capacity for RATE_A = 0 entries, as a multiple of the
  /// largest nominal demand (at least 1 p.u.).
  double unlimited_cap_demand_multiple = 100.0;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses the bus/gen/branch/baseMVA (plus optional gencost) subset of a
/// MATPOWER case. Bus ids are remapped to contiguous 0-based indices in
/// order of appearance; all powers are converted to per-unit.
Network parse_matpower(const std::string& text,
                       const MatpowerOptions& options = {});

Network parse_matpower_file(const std::string& path,
                            const MatpowerOptions& options = {});

/// Writes the supported subset back out; parse(serialize(net)) == net.
std::string serialize_matpower(const Network& net);

}  // namespace gridess
