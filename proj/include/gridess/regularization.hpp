#pragma once

#include <string>
#include <vector>

#include "gridess/network.hpp"
#include "gridess/opf.hpp"

namespace gridess {

/// True when the penalty is strong enough for the relaxation of the
/// regularized model to close the integrality gap (requires zero minimum
/// charge/discharge rates): lambda_c + eta_c eta_d lambda_d >= 1 - eta_c eta_d.
bool zero_gap_lambda_ok(const Lambda& lambda, double eta_c, double eta_d);

/// The penalty pair minimizing the worst-case cost inflation bound. It
/// meets the zero-gap condition with equality and balances
/// ec_max * lambda_c = ed_max * lambda_d.
Lambda best_worst_case_lambda(double ec_max, double ed_max, double eta_c,
                              double eta_d);

/// Worst-case inflation of c(p) caused by the penalty:
/// T * N_b * max(ec_max * lambda_c, ed_max * lambda_d).
double worst_case_gap_bound(int horizon, int n_batteries, double ec_max,
                            double ed_max, const Lambda& lambda);

/// Rebuilds a relaxed optimum into a charge/discharge-complementary point:
/// subtracts the wasted circular energy from both sides, rebalances the
/// slacks, and sets the mode indicator from the surviving charge. Feasible
/// whenever the input is, and never worse under a zero-gap penalty.
/// Requires ec_min = ed_min = 0; throws std::invalid_argument otherwise and
/// std::runtime_error when the input is not a consistent dispatch.
DispatchSolution integralize(const DispatchSolution& dispatch,
                             const Network& network, const Lambda& lambda);

struct GapReport {
  double z_mip = 0.0;
  double z_lp = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  bool zero_gap_condition_met = false;
};

/// Solves the regularized model and its relaxation and reports the gap.
GapReport measure_zero_gap(const Network& network, const DemandScenario& demand,
                           const Lambda& lambda, bool include_ohms_law = false);

struct StructureReport {
  double max_pc_pls = 0.0;
  double max_pd_pex = 0.0;
  bool condition_strict = false;  // lambda_c + eta^2 lambda_d > 1 - eta^2
  bool ok_pc_pls = false;         // max_pc_pls within tolerance
  bool ok_pd_pex = false;
};

StructureReport check_structure(const DispatchSolution& dispatch,
                                const Lambda& lambda, double eta_c,
                                double eta_d, double tol = 1e-9);

/// Structure check with the constructive fallback: on an apparent violation
/// the solve is repeated at a pinned gap tolerance, and the repair
/// adjustments are applied to decide whether a strictly better feasible
/// point exists (a genuine counterexample) or the excess product was noise.
struct StructureVerification {
  StructureReport report;
  bool genuine_violation = false;
  double objective = 0.0;
  double repaired_objective = 0.0;
};

StructureVerification verify_structure(const Network& network,
                                       const DemandScenario& demand,
                                       const Lambda& lambda,
                                       bool include_ohms_law = false);

struct ExactnessReport {
  double z_ori = 0.0;        // exact-model optimum
  double delta = 0.0;        // second-best minus best (inf when all tie)
  double min_lambda_g = 0.0; // cheapest penalty over the optimal dispatches
  bool exact = false;        // min_lambda_g < delta
  int optimal_patterns = 0;  // |U*|
  bool reg_u_recovered = false;  // regularized optimum's pattern is in U*
};

/// Enumerates every charge/discharge mode pattern (up to 2^20), solving the
/// continuous problem for each, and evaluates the recovery condition.
/// Throws std::invalid_argument when T * |N_b| > 20.
ExactnessReport check_exactness_bruteforce(const Network& network,
                                           const DemandScenario& demand,
                                           const Lambda& lambda);

/// Whether the regularized model at unit penalties matches the model with
/// charging and discharging removed (within 1e-6).
bool no_battery_equivalence(const Network& network,
                            const DemandScenario& demand);

std::string gap_report_to_json(const GapReport& r);
std::string structure_report_to_json(const StructureReport& r);

struct LambdaSweepRow {
  double lambda = 0.0;
  double z_mip = 0.0;
  double z_lp = 0.0;
  double gap = 0.0;
};

/// CSV with header lambda,z_mip,z_lp,gap.
std::string lambda_sweep_to_csv(const std::vector<LambdaSweepRow>& rows);

namespace detail {

/// Adjustment removing a coincident charge/shed pair at one bus: cuts both
/// at the first offending period and walks the later discharges down so the
/// state of charge never dips under its floor.
DispatchSolution repair_charge_shedding(const DispatchSolution& dispatch,
                                        const Network& network, int bus,
                                        const Lambda& lambda);

/// Mirror adjustment for a coincident discharge/excess pair: cuts both and
/// walks the later charges down so the state of charge never tops its cap.
DispatchSolution repair_discharge_excess(const DispatchSolution& dispatch,
                                         const Network& network, int bus,
                                         const Lambda& lambda);

}  // namespace detail

}  // namespace gridess
