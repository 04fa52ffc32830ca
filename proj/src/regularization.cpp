#include "gridess/regularization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gridess/branch_bound.hpp"
#include "gridess/simplex.hpp"

namespace gridess {

namespace {

constexpr double kCondTol = 1e-12;

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double round_trip(double eta_c, double eta_d) { return eta_c * eta_d; }

}  // namespace

bool zero_gap_lambda_ok(const Lambda& lambda, double eta_c, double eta_d) {
  if (!(eta_c > 0 && eta_c <= 1 && eta_d > 0 && eta_d <= 1))
    throw std::invalid_argument("efficiencies must be in (0,1]");
  double rt = round_trip(eta_c, eta_d);
  return lambda.charge + rt * lambda.discharge >= 1.0 - rt - kCondTol;
}

Lambda best_worst_case_lambda(double ec_max, double ed_max, double eta_c,
                              double eta_d) {
  if (!(ec_max > 0 && ed_max > 0))
    throw std::invalid_argument("rate limits must be positive");
  double rt = round_trip(eta_c, eta_d);
  double denom = ed_max + rt * ec_max;
  return {(ed_max - rt * ed_max) / denom, (ec_max - rt * ec_max) / denom};
}

double worst_case_gap_bound(int horizon, int n_batteries, double ec_max,
                            double ed_max, const Lambda& lambda) {
  if (horizon < 1 || n_batteries < 1)
    throw std::invalid_argument("horizon and battery count must be >= 1");
  return horizon * n_batteries *
         std::max(ec_max * lambda.charge, ed_max * lambda.discharge);
}

DispatchSolution integralize(const DispatchSolution& dispatch,
                             const Network& network, const Lambda& lambda) {
  const BatteryConfig& bat = network.battery;
  if (bat.ec_min > 0.0 || bat.ed_min > 0.0)
    throw std::invalid_argument(
        "integralize requires zero minimum charge and discharge rates");
  const double rt = bat.round_trip();
  const int T = dispatch.horizon, N = dispatch.n_buses;
  const double tol = 1e-7;
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) {
      if (dispatch.p_c[t][i] < -tol || dispatch.p_d[t][i] < -tol ||
          dispatch.p_ls[t][i] < -tol || dispatch.p_ex[t][i] < -tol)
        throw std::runtime_error("integralize: negative dispatch entry");
    }
  }
  for (int i : network.battery_buses()) {
    double prev = bat.e0;
    for (int t = 0; t < T; ++t) {
      double expect =
          prev + bat.eta_c * dispatch.p_c[t][i] - dispatch.p_d[t][i] / bat.eta_d;
      if (std::abs(dispatch.p_s[t][i] - expect) > 1e-5)
        throw std::runtime_error(
            "integralize: state-of-charge recursion violated in input");
      prev = dispatch.p_s[t][i];
    }
  }

  DispatchSolution out = dispatch;  // theta, flow, p_g, p_s stay as-is
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) {
      double pc = std::max(dispatch.p_c[t][i], 0.0);
      double pd = std::max(dispatch.p_d[t][i], 0.0);
      double npc = std::max(pc - pd / rt, 0.0);
      double npd = std::max(pd - rt * pc, 0.0);
      double net_before =
          -pc + pd + dispatch.p_ls[t][i] - dispatch.p_ex[t][i];
      double s = net_before + npc - npd;
      out.p_c[t][i] = npc;
      out.p_d[t][i] = npd;
      out.p_ls[t][i] = std::max(s, 0.0);
      out.p_ex[t][i] = std::max(-s, 0.0);
      out.u[t][i] = npc > 0.0 ? 1.0 : 0.0;
    }
  }
  double slack = 0.0;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i) slack += out.p_ls[t][i] + out.p_ex[t][i];
  double gen_part = dispatch.objective_c;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i)
      gen_part -= dispatch.p_ls[t][i] + dispatch.p_ex[t][i];
  out.objective_c = gen_part + slack;
  out.objective_reg = out.objective_c + lambda.charge * out.total_charge() +
                      lambda.discharge * out.total_discharge();
  return out;
}

GapReport measure_zero_gap(const Network& network, const DemandScenario& demand,
                           const Lambda& lambda, bool include_ohms_law) {
  GapReport r;
  OpfModel mip = build_opf(network, demand, lambda,
                           {OpfVariant::RegBatteryMIP, include_ohms_law});
  OpfModel lp = build_opf(network, demand, lambda,
                          {OpfVariant::RegBatteryLP, include_ohms_law});
  Solution sm = solve_mip(mip.model);
  Solution sl = solve_lp(lp.model);
  if (!sm.optimal() || !sl.optimal())
    throw std::runtime_error("gap measurement: solve failed");
  r.z_mip = sm.objective;
  r.z_lp = sl.objective;
  r.abs_gap = r.z_mip - r.z_lp;
  r.rel_gap = std::abs(r.abs_gap) / std::max(1.0, std::abs(r.z_mip));
  r.zero_gap_condition_met = network.battery.ec_min == 0.0 &&
                             network.battery.ed_min == 0.0 &&
                             zero_gap_lambda_ok(lambda, network.battery.eta_c,
                                                network.battery.eta_d);
  return r;
}

StructureReport check_structure(const DispatchSolution& dispatch,
                                const Lambda& lambda, double eta_c,
                                double eta_d, double tol) {
  StructureReport r;
  r.max_pc_pls = dispatch.max_product_pc_pls();
  r.max_pd_pex = dispatch.max_product_pd_pex();
  double rt = round_trip(eta_c, eta_d);
  r.condition_strict = lambda.charge + rt * lambda.discharge > 1.0 - rt + kCondTol;
  r.ok_pc_pls = r.max_pc_pls <= tol;
  r.ok_pd_pex = r.max_pd_pex <= tol;
  return r;
}

namespace detail {

namespace {

void refresh_objectives(DispatchSolution& d, double gen_cost,
                        const Lambda& lambda) {
  double slack = 0.0;
  for (int t = 0; t < d.horizon; ++t)
    for (int i = 0; i < d.n_buses; ++i) slack += d.p_ls[t][i] + d.p_ex[t][i];
  d.objective_c = gen_cost + slack;
  d.objective_reg = d.objective_c + lambda.charge * d.total_charge() +
                    lambda.discharge * d.total_discharge();
}

double generation_part(const DispatchSolution& d) {
  double slack = 0.0;
  for (int t = 0; t < d.horizon; ++t)
    for (int i = 0; i < d.n_buses; ++i) slack += d.p_ls[t][i] + d.p_ex[t][i];
  return d.objective_c - slack;
}

}  // namespace

DispatchSolution repair_charge_shedding(const DispatchSolution& dispatch,
                                        const Network& network, int bus,
                                        const Lambda& lambda) {
  const BatteryConfig& bat = network.battery;
  const int T = dispatch.horizon;
  DispatchSolution d = dispatch;
  int tau0 = -1;
  for (int t = 0; t < T; ++t) {
    if (d.p_c[t][bus] > 0 && d.p_ls[t][bus] > 0) {
      tau0 = t;
      break;
    }
  }
  if (tau0 < 0) return d;
  double cut = std::min(d.p_c[tau0][bus], d.p_ls[tau0][bus]);
  d.p_c[tau0][bus] -= cut;
  d.p_ls[tau0][bus] -= cut;
  double delta = -bat.eta_c * cut;
  // Walk forward: the lowered state of charge may undershoot the floor at
  // discharge periods; shave those discharges and shed instead.
  for (int t = tau0; t < T; ++t) {
    if (t > tau0 && dispatch.p_d[t][bus] > 0) {
      double need = std::max(bat.e_min - dispatch.p_s[t][bus] - delta, 0.0);
      d.p_d[t][bus] = std::max(d.p_d[t][bus] - bat.eta_d * need, 0.0);
      d.p_ls[t][bus] += bat.eta_d * need;
      delta += need;
    }
    d.p_s[t][bus] = dispatch.p_s[t][bus] + delta;
  }
  refresh_objectives(d, generation_part(dispatch), lambda);
  return d;
}

DispatchSolution repair_discharge_excess(const DispatchSolution& dispatch,
                                         const Network& network, int bus,
                                         const Lambda& lambda) {
  const BatteryConfig& bat = network.battery;
  const int T = dispatch.horizon;
  DispatchSolution d = dispatch;
  int tau0 = -1;
  for (int t = 0; t < T; ++t) {
    if (d.p_d[t][bus] > 0 && d.p_ex[t][bus] > 0) {
      tau0 = t;
      break;
    }
  }
  if (tau0 < 0) return d;
  double cut = std::min(d.p_d[tau0][bus], d.p_ex[tau0][bus]);
  d.p_d[tau0][bus] -= cut;
  d.p_ex[tau0][bus] -= cut;
  double delta = cut / bat.eta_d;
  // Walk forward: the raised state of charge may overshoot the cap at
  // charge periods; shave those charges and spill instead.
  for (int t = tau0; t < T; ++t) {
    if (t > tau0 && dispatch.p_c[t][bus] > 0) {
      double over = std::max(dispatch.p_s[t][bus] + delta - bat.e_max, 0.0);
      d.p_c[t][bus] = std::max(d.p_c[t][bus] - over / bat.eta_c, 0.0);
      d.p_ex[t][bus] += over / bat.eta_c;
      delta -= over;
    }
    d.p_s[t][bus] = dispatch.p_s[t][bus] + delta;
  }
  refresh_objectives(d, generation_part(dispatch), lambda);
  return d;
}

}  // namespace detail

namespace {

double regularized_value(const DispatchSolution& d, const Lambda& lambda) {
  return d.objective_c + lambda.charge * d.total_charge() +
         lambda.discharge * d.total_discharge();
}

}  // namespace

StructureVerification verify_structure(const Network& network,
                                       const DemandScenario& demand,
                                       const Lambda& lambda,
                                       bool include_ohms_law) {
  StructureVerification v;
  OpfModel m = build_opf(network, demand, lambda,
                         {OpfVariant::RegBatteryMIP, include_ohms_law});
  MipOptions opt;
  Solution s = solve_mip(m.model, opt);
  if (!s.optimal()) throw std::runtime_error("structure check: solve failed");
  DispatchSolution d = extract_dispatch(m, s);
  const auto& bat = network.battery;
  v.report = check_structure(d, lambda, bat.eta_c, bat.eta_d);
  v.objective = regularized_value(d, lambda);
  v.repaired_objective = v.objective;
  bool suspicious = !v.report.ok_pc_pls ||
                    (v.report.condition_strict && !v.report.ok_pd_pex);
  if (!suspicious) return v;

  // Pin the proof tolerance and retry once before judging.
  opt.gap_tol = 1e-9;
  s = solve_mip(m.model, opt);
  d = extract_dispatch(m, s);
  v.report = check_structure(d, lambda, bat.eta_c, bat.eta_d);
  v.objective = regularized_value(d, lambda);
  suspicious = !v.report.ok_pc_pls ||
               (v.report.condition_strict && !v.report.ok_pd_pex);
  if (!suspicious) return v;

  // Apply the constructive adjustments; a strict improvement over the
  // claimed optimum is a genuine counterexample, anything else is noise.
  double best = v.objective;
  for (int bus : network.battery_buses()) {
    DispatchSolution r1 = detail::repair_charge_shedding(d, network, bus, lambda);
    best = std::min(best, regularized_value(r1, lambda));
    if (v.report.condition_strict) {
      DispatchSolution r2 =
          detail::repair_discharge_excess(d, network, bus, lambda);
      best = std::min(best, regularized_value(r2, lambda));
    }
  }
  v.repaired_objective = best;
  v.genuine_violation = best < v.objective - 1e-9;
  return v;
}

ExactnessReport check_exactness_bruteforce(const Network& network,
                                           const DemandScenario& demand,
                                           const Lambda& lambda) {
  const auto battery = network.battery_buses();
  const int T = demand.horizon;
  const int nb = static_cast<int>(battery.size());
  const int bits = T * nb;
  if (bits > 20)
    throw std::invalid_argument(
        "mode enumeration limited to 2^20 patterns (T * batteries <= 20)");
  const std::size_t npat = std::size_t{1} << bits;

  OpfModel base = build_opf(network, demand, {}, {OpfVariant::BatteryMIP, false});
  // Continuous evaluation per fixed pattern.
  auto pattern_model = [&](std::size_t pat) {
    LinearModel m = base.model;
    for (int t = 0; t < T; ++t)
      for (int b = 0; b < nb; ++b) {
        double val = (pat >> (t * nb + b)) & 1 ? 1.0 : 0.0;
        m.set_bounds(base.index.u(t, battery[b]), val, val);
      }
    return m;
  };

  std::vector<double> objective(npat, kInfinity);
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned workers = npat >= 64 ? std::min<unsigned>(hw, 8) : 1;
  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Solution s = solve_lp(pattern_model(p));
      if (s.optimal()) objective[p] = s.objective;
    }
  };
  if (workers <= 1) {
    run_chunk(0, npat);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (npat + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      std::size_t b = w * chunk, e = std::min(npat, b + chunk);
      if (b < e) pool.emplace_back(run_chunk, b, e);
    }
    for (auto& th : pool) th.join();
  }

  ExactnessReport r;
  double z_best = kInfinity;
  for (double z : objective) z_best = std::min(z_best, z);
  if (z_best == kInfinity)
    throw std::runtime_error("exactness check: every pattern is infeasible");
  r.z_ori = z_best;
  std::vector<std::size_t> ustar;
  double z_second = kInfinity;
  for (std::size_t p = 0; p < npat; ++p) {
    if (objective[p] <= z_best + 1e-6)
      ustar.push_back(p);
    else
      z_second = std::min(z_second, objective[p]);
  }
  r.optimal_patterns = static_cast<int>(ustar.size());
  r.delta = z_second == kInfinity ? kInfinity : z_second - z_best;

  // Cheapest penalty attainable over the optimal dispatch set: minimize
  // lambda . g(p) with the pattern fixed and c(p) pinned at the optimum.
  double min_pen = kInfinity;
  for (std::size_t p : ustar) {
    LinearModel m = pattern_model(p);
    std::vector<RowEntry> cost_row;
    for (int v = 0; v < m.num_vars(); ++v) {
      double c = m.obj_coeff(v);
      if (c != 0.0) cost_row.push_back({v, c});
      m.set_obj_coeff(v, 0.0);
    }
    for (int t = 0; t < T; ++t)
      for (int b = 0; b < nb; ++b) {
        m.set_obj_coeff(base.index.pc(t, battery[b]), lambda.charge);
        m.set_obj_coeff(base.index.pd(t, battery[b]), lambda.discharge);
      }
    m.add_row(RowSense::LessEqual, z_best + 1e-9, cost_row);
    Solution s = solve_lp(m);
    if (s.optimal()) min_pen = std::min(min_pen, s.objective);
  }
  r.min_lambda_g = min_pen;
  r.exact = min_pen < r.delta;

  if (r.exact) {
    OpfModel reg = build_opf(network, demand, lambda,
                             {OpfVariant::RegBatteryMIP, false});
    Solution s = solve_mip(reg.model);
    if (s.optimal()) {
      std::size_t pat = 0;
      for (int t = 0; t < T; ++t)
        for (int b = 0; b < nb; ++b)
          if (s.primal[reg.index.u(t, battery[b])] > 0.5)
            pat |= std::size_t{1} << (t * nb + b);
      // Membership by value: a pattern belongs to the optimal set exactly
      // when its best continuous cost matches the optimum.
      r.reg_u_recovered = objective[pat] <= z_best + 1e-6;
    }
  }
  return r;
}

bool no_battery_equivalence(const Network& network,
                            const DemandScenario& demand) {
  Lambda ones{1.0, 1.0};
  OpfModel reg = build_opf(network, demand, ones,
                           {OpfVariant::RegBatteryMIP, false});
  OpfModel nb = build_opf(network, demand, {}, {OpfVariant::NoBattery, false});
  Solution sr = solve_mip(reg.model);
  Solution sn = solve_lp(nb.model);
  if (!sr.optimal() || !sn.optimal())
    throw std::runtime_error("no-battery comparison: solve failed");
  return std::abs(sr.objective - sn.objective) <= 1e-6;
}

std::string gap_report_to_json(const GapReport& r) {
  std::ostringstream out;
  out << "{\"z_mip\":" << num(r.z_mip) << ",\"z_lp\":" << num(r.z_lp)
      << ",\"abs_gap\":" << num(r.abs_gap) << ",\"rel_gap\":" << num(r.rel_gap)
      << ",\"zero_gap_condition_met\":"
      << (r.zero_gap_condition_met ? "true" : "false") << "}";
  return out.str();
}

std::string structure_report_to_json(const StructureReport& r) {
  std::ostringstream out;
  out << "{\"max_pc_pls\":" << num(r.max_pc_pls)
      << ",\"max_pd_pex\":" << num(r.max_pd_pex) << ",\"condition_strict\":"
      << (r.condition_strict ? "true" : "false")
      << ",\"ok_pc_pls\":" << (r.ok_pc_pls ? "true" : "false")
      << ",\"ok_pd_pex\":" << (r.ok_pd_pex ? "true" : "false") << "}";
  return out.str();
}

std::string lambda_sweep_to_csv(const std::vector<LambdaSweepRow>& rows) {
  std::string out = "lambda,z_mip,z_lp,gap\n";
  for (const auto& r : rows)
    out += num(r.lambda) + "," + num(r.z_mip) + "," + num(r.z_lp) + "," +
           num(r.gap) + "\n";
  return out;
}

}  // namespace gridess
