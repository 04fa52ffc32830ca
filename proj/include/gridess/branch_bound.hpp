#pragma once

#include "gridess/linear_model.hpp"
#include "gridess/simplex.hpp"

namespace gridess {

struct MipOptions {
  double gap_tol = 1e-6;  // relative incumbent/bound gap for Optimal
  double int_tol = 1e-6;
  double time_limit_sec = 600.0;
  long max_nodes = 500000;
  SimplexOptions lp;
};

/// Best-bound branch and bound over the model's binary variables.
/// Branching picks the most fractional binary, lowest index on ties.
/// With no binaries this is exactly solve_lp.
Solution solve_mip(const LinearModel& model, const MipOptions& options = {});

}  // namespace gridess
