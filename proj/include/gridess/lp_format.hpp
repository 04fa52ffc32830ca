#pragma once

#include <string>

#include "gridess/linear_model.hpp"

namespace gridess {

/// Industry-standard LP file text with fixed section order:
/// Minimize/Maximize, Subject To, Bounds, Binary, End.
/// Names are deterministic (user label or x<index>); numbers use the
/// shortest representation that round-trips to the same double.
std::string write_lp_format(const LinearModel& model);

/// Reads back the subset produced by write_lp_format (plus tolerant
/// whitespace). Throws std::runtime_error with a line reference on
/// malformed input.
LinearModel read_lp_format(const std::string& text);

}  // namespace gridess
