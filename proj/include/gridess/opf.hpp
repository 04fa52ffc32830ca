#pragma once

#include <string>
#include <vector>

#include "gridess/linear_model.hpp"
#include "gridess/network.hpp"

namespace gridess {

struct Lambda {
  double charge = 0.0;     // penalty per p.u. charged
  double discharge = 0.0;  // penalty per p.u. discharged
};

enum class OpfVariant {
  BatteryMIP,     // exact model, binary u, no regularizer
  RegBatteryMIP,  // regularized objective, binary u
  RegBatteryLP,   // regularized objective, u relaxed to [0,1]
  NoBattery       // charge and discharge fixed to zero
};

struct ModelVariant {
  OpfVariant tag = OpfVariant::BatteryMIP;
  bool include_ohms_law = true;
};

/// Column layout of a built model. Variable order is fixed
/// (theta, flow, p_g, p_c, p_d, p_s, p_ls, p_ex, u), time-major within
/// each block, so exports are deterministic.
struct OpfIndex {
  int horizon = 0;
  int n_buses = 0;
  int n_lines = 0;
  int n_gens = 0;
  bool has_theta = false;
  int theta0 = -1, flow0 = -1, pg0 = -1, pc0 = -1, pd0 = -1, ps0 = -1,
      pls0 = -1, pex0 = -1, u0 = -1;
  int num_vars = 0;

  int theta(int t, int bus) const { return theta0 + t * n_buses + bus; }
  int flow(int t, int line) const { return flow0 + t * n_lines + line; }
  int pg(int t, int gen) const { return pg0 + t * n_gens + gen; }
  int pc(int t, int bus) const { return pc0 + t * n_buses + bus; }
  int pd(int t, int bus) const { return pd0 + t * n_buses + bus; }
  int ps(int t, int bus) const { return ps0 + t * n_buses + bus; }
  int pls(int t, int bus) const { return pls0 + t * n_buses + bus; }
  int pex(int t, int bus) const { return pex0 + t * n_buses + bus; }
  int u(int t, int bus) const { return u0 + t * n_buses + bus; }
};

struct OpfModel {
  LinearModel model;
  OpfIndex index;
  ModelVariant variant;
  Lambda lambda;
  std::vector<int> gen_bus;       // bus of each generator column block
  std::vector<double> gen_cost;   // linear cost of each generator
};

/// Builds the dispatch model for one demand scenario. Throws
/// std::invalid_argument on dimension mismatches or missing battery buses.
OpfModel build_opf(const Network& network, const DemandScenario& demand,
                   const Lambda& lambda, const ModelVariant& variant);

struct DispatchSolution {
  int horizon = 0;
  int n_buses = 0;
  int n_lines = 0;
  std::vector<std::vector<double>> theta, flow;            // [t][bus], [t][line]
  std::vector<std::vector<double>> p_g, p_s, p_c, p_d, p_ls, p_ex, u;  // [t][bus]
  double objective_c = 0.0;    // c(p): generation cost plus slack penalties
  double objective_reg = 0.0;  // c(p) + lambda . g(p)

  double total_charge() const;
  double total_discharge() const;
  double max_product_pc_pls() const;
  double max_product_pd_pex() const;
};

/// Maps a solved model back to dispatch matrices. objective_c is recomputed
/// from the primal values and cross-checked against the solver's objective.
/// Throws std::runtime_error when the solution is not optimal or the
/// recomputed objective disagrees beyond 1e-6.
DispatchSolution extract_dispatch(const OpfModel& opf, const Solution& solution);

std::string dispatch_to_csv(const DispatchSolution& d);
std::string dispatch_to_json(const DispatchSolution& d);

}  // namespace gridess
