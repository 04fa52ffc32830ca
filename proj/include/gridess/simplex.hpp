#pragma once

#include "gridess/linear_model.hpp"

namespace gridess {

struct SimplexOptions {
  double feas_tol = 1e-8;    // primal feasibility on basic values
  double opt_tol = 1e-8;     // reduced-cost optimality threshold
  long max_iterations = -1;  // -1: 20000 + 100 * num_rows
  double time_limit_sec = -1.0;
  int refactor_every = 100;
};

/// Bounded-variable primal simplex. Binary markers are ignored (treated as
/// their [0,1] bounds). Returns basic optimal solutions with row duals and
/// reduced costs. `warm` may carry the basis of a related solve.
Solution solve_lp(const LinearModel& model, const SimplexOptions& options = {},
                  const Basis* warm = nullptr);

}  // namespace gridess
