#pragma once

#include <string>
#include <vector>

#include "gridess/linear_model.hpp"
#include "gridess/network.hpp"
#include "gridess/opf.hpp"

namespace gridess {

struct Placement {
  std::vector<char> x;  // one flag per bus
  int budget = 0;

  int count() const {
    int c = 0;
    for (char v : x) c += v;
    return c;
  }
  bool within_budget() const { return count() <= budget; }
};

struct Attack {
  std::vector<char> y;  // one flag per line
  int budget = 0;

  int count() const {
    int c = 0;
    for (char v : y) c += v;
    return c;
  }
  bool within_budget() const { return count() <= budget; }
  bool operator==(const Attack& other) const { return y == other.y; }
};

enum class ThirdLevelVariant {
  Reg,      // regularized objective, relaxed mode indicator
  ExactMIP, // plain cost, binary mode indicator
  LPRelax   // plain cost, relaxed mode indicator
};

/// Dispatch model seen by the operator after placement x and attack y:
/// no angle constraints, free generation cost, attacked lines clamped to
/// zero capacity, battery blocks active only where x places one.
OpfModel build_third_level(const Network& network, const DemandScenario& demand,
                           const Placement& x, const Attack& y,
                           const Lambda& lambda, ThirdLevelVariant variant);

/// One bilinear objective term y_line * coeff * dual_var.
struct BilinearTerm {
  int line = 0;
  int dual_var = 0;
  double coeff = 0.0;
};

/// Maximization dual of the relaxed third level at a fixed placement, with
/// the attack left symbolic in the flow-capacity terms.
struct DualThirdLevel {
  LinearModel model;  // dual variables only; objective linear part
  std::vector<BilinearTerm> bilinear;
  int horizon = 0;
  int n_lines = 0;
  Placement placement;
  Lambda lambda;
};

/// Builds the dual. For the Reg variant the penalty must satisfy the
/// zero-gap condition (otherwise the dual value would not certify the
/// integer third level); LPRelax accepts any penalty and is used with zero.
DualThirdLevel dualize_third_level(const Network& network,
                                   const DemandScenario& demand,
                                   const Placement& x, const Lambda& lambda,
                                   ThirdLevelVariant variant,
                                   bool bound_flow_duals = true);

/// Exact linearization of the bilinear attack terms: one pair of envelope
/// variables per (period, line) with the four standard inequalities.
/// Attack columns come back binary; add the budget row before solving.
struct McCormickModel {
  LinearModel model;
  int y0 = -1;  // first attack column
  int n_lines = 0;
};

McCormickModel mccormick_linearize(const DualThirdLevel& dual);

/// Evaluates the dual at a frozen attack (envelopes collapse to y * beta).
Solution solve_dual_fixed_attack(const DualThirdLevel& dual, const Attack& y);

/// Max over attacks with at most k lines of the third-level value under
/// placement x.
std::pair<Attack, double> worst_attack(const Network& network,
                                       const DemandScenario& demand,
                                       const Placement& x, int k,
                                       const Lambda& lambda,
                                       ThirdLevelVariant variant =
                                           ThirdLevelVariant::Reg);

struct TrilevelStop {
  double gap = 0.005;
  int max_iterations = 1000;
  double time_limit_sec = 600.0;
};

enum class TrilevelStatus { Converged, Stalled, IterationLimit, TimeLimit };

const char* to_string(TrilevelStatus s);

struct TrilevelRun {
  double upper = 0.0;
  double lower = 0.0;
  std::vector<double> ub_history;
  std::vector<double> lb_history;
  Placement best_x;
  Attack worst_y;
  int iterations = 0;
  TrilevelStatus status = TrilevelStatus::Converged;
};

struct TrilevelResult {
  TrilevelRun reg;  // regularized model bounds
  TrilevelRun lp;   // relaxed exact model bounds (the lower certificate)
  double solution_gap = 0.0;      // |reg.upper - lp.lower| / |reg.upper|
  double trilevel_gap_reg = 0.0;  // |reg.upper - reg.lower| / |reg.upper|
  double trilevel_gap_lp = 0.0;
  double wall_time_sec = 0.0;
  std::string network_name;
  int b = 0;
  int k = 0;
};

/// Two cutting-plane runs (regularized and relaxed-exact), each alternating
/// a placement master over the discovered attacks with a worst-attack
/// subproblem, stopping at the relative-gap threshold.
TrilevelResult solve_trilevel(const Network& network,
                              const DemandScenario& demand, int b, int k,
                              const Lambda& lambda,
                              const TrilevelStop& stop = {});

/// Full enumeration reference: min over placements of max over attacks with
/// the integer third level. Throws std::invalid_argument when the subset
/// count exceeds 1e5.
double brute_force_trilevel(const Network& network,
                            const DemandScenario& demand, int b, int k);

std::string trilevel_result_to_json(const TrilevelResult& r);
std::string trilevel_csv_header();
std::string trilevel_result_to_csv_row(const TrilevelResult& r);

}  // namespace gridess
