#include "gridess/trilevel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "gridess/branch_bound.hpp"
#include "gridess/regularization.hpp"
#include "gridess/simplex.hpp"

namespace gridess {

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void check_shapes(const Network& net, const Placement& x, const Attack& y) {
  if (static_cast<int>(x.x.size()) != net.num_buses())
    throw std::invalid_argument("placement size does not match the network");
  if (static_cast<int>(y.y.size()) != net.num_lines())
    throw std::invalid_argument("attack size does not match the network");
  if (!x.within_budget()) throw std::invalid_argument("placement exceeds budget");
  if (!y.within_budget()) throw std::invalid_argument("attack exceeds budget");
}

}  // namespace

const char* to_string(TrilevelStatus s) {
  switch (s) {
    case TrilevelStatus::Converged: return "converged";
    case TrilevelStatus::Stalled: return "stalled";
    case TrilevelStatus::IterationLimit: return "iteration_limit";
    case TrilevelStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

OpfModel build_third_level(const Network& network, const DemandScenario& demand,
                           const Placement& x, const Attack& y,
                           const Lambda& lambda, ThirdLevelVariant variant) {
  check_shapes(network, x, y);
  // The operator's view of the grid: attacked lines lose their capacity,
  // batteries exist exactly where placed, generation cost is dropped.
  Network view = network;
  for (int l = 0; l < view.num_lines(); ++l)
    if (y.y[l]) view.lines[l].capacity = 0.0;
  for (auto& g : view.generators) g.cost_coeff = 0.0;
  std::vector<int> placed;
  for (int i = 0; i < view.num_buses(); ++i)
    if (x.x[i]) placed.push_back(i);
  view.set_battery_buses(placed);

  ModelVariant mv;
  mv.include_ohms_law = false;
  if (placed.empty()) {
    mv.tag = OpfVariant::NoBattery;
  } else {
    switch (variant) {
      case ThirdLevelVariant::Reg: mv.tag = OpfVariant::RegBatteryLP; break;
      case ThirdLevelVariant::ExactMIP: mv.tag = OpfVariant::BatteryMIP; break;
      case ThirdLevelVariant::LPRelax: mv.tag = OpfVariant::RegBatteryLP; break;
    }
  }
  Lambda eff = variant == ThirdLevelVariant::Reg ? lambda : Lambda{};
  return build_opf(view, demand, eff, mv);
}

DualThirdLevel dualize_third_level(const Network& network,
                                   const DemandScenario& demand,
                                   const Placement& x, const Lambda& lambda,
                                   ThirdLevelVariant variant,
                                   bool bound_flow_duals) {
  if (variant == ThirdLevelVariant::ExactMIP)
    throw std::invalid_argument("cannot dualize the integer third level");
  if (variant == ThirdLevelVariant::Reg &&
      !zero_gap_lambda_ok(lambda, network.battery.eta_c, network.battery.eta_d))
    throw std::invalid_argument(
        "penalty too small: the relaxed dual would not certify the "
        "regularized third level");
  if (static_cast<int>(x.x.size()) != network.num_buses())
    throw std::invalid_argument("placement size does not match the network");
  if (demand.num_buses() != network.num_buses())
    throw std::invalid_argument("demand bus count does not match the network");

  const int T = demand.horizon;
  const int N = network.num_buses();
  const int L = network.num_lines();
  const int G = static_cast<int>(network.generators.size());
  const BatteryConfig& bat = network.battery;
  const Lambda lam = variant == ThirdLevelVariant::Reg ? lambda : Lambda{};

  DualThirdLevel out;
  out.horizon = T;
  out.n_lines = L;
  out.placement = x;
  out.lambda = lam;
  LinearModel& m = out.model;
  m.sense = ObjSense::Maximize;

  auto grid_var = [&](const char* p, int t, int k, double lo, double up,
                      double obj) {
    return m.add_var(lo, up, obj,
                     std::string(p) + "_t" + std::to_string(t + 1) + "_" +
                         std::to_string(k));
  };

  double beta_cap = bound_flow_duals ? 2.0 : kInfinity;
  // Column blocks, time-major like the primal builders.
  std::vector<int> alpha(T * N), beta_p(T * L), beta_m(T * L);
  std::vector<int> gamma_p(T * G), gamma_m(T * G);
  std::vector<int> tau(T * N), tau0(N);
  std::vector<int> mu_p(T * N), mu_m(T * N), nu_p(T * N), nu_m(T * N);
  std::vector<int> om_p(T * N), om_m(T * N), phi(T * N);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i)
      alpha[t * N + i] = grid_var("al", t, i, -1.0, 1.0, -demand.at(t, i));
  for (int t = 0; t < T; ++t)
    for (int l = 0; l < L; ++l) {
      double f = network.lines[l].capacity;
      beta_p[t * L + l] = grid_var("bp", t, l, 0.0, beta_cap, -f);
      beta_m[t * L + l] = grid_var("bm", t, l, 0.0, beta_cap, -f);
      if (f != 0.0) {
        out.bilinear.push_back({l, beta_p[t * L + l], f});
        out.bilinear.push_back({l, beta_m[t * L + l], f});
      }
    }
  for (int t = 0; t < T; ++t)
    for (int g = 0; g < G; ++g) {
      gamma_p[t * G + g] =
          grid_var("gp", t, g, 0.0, kInfinity, network.generators[g].g_min);
      gamma_m[t * G + g] =
          grid_var("gm", t, g, 0.0, kInfinity, -network.generators[g].g_max);
    }
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i) {
      double xi = x.x[i] ? 1.0 : 0.0;
      tau[t * N + i] = grid_var("ta", t, i, -kInfinity, kInfinity, 0.0);
      mu_p[t * N + i] = grid_var("mp", t, i, 0.0, kInfinity, bat.e_min * xi);
      mu_m[t * N + i] = grid_var("mm", t, i, 0.0, kInfinity, -bat.e_max * xi);
      nu_p[t * N + i] = grid_var("np", t, i, 0.0, kInfinity, 0.0);
      nu_m[t * N + i] = grid_var("nm", t, i, 0.0, kInfinity, 0.0);
      om_p[t * N + i] = grid_var("op", t, i, 0.0, kInfinity, bat.ed_min * xi);
      om_m[t * N + i] = grid_var("om", t, i, 0.0, kInfinity, -bat.ed_max * xi);
      phi[t * N + i] = grid_var("ph", t, i, 0.0, kInfinity, -xi);
    }
  for (int i = 0; i < N; ++i) {
    double xi = x.x[i] ? 1.0 : 0.0;
    tau0[i] = m.add_var(-kInfinity, kInfinity, bat.e0 * xi,
                        "t0_" + std::to_string(i));
  }

  // Columns of the relaxed primal become dual rows.
  for (int t = 0; t < T; ++t) {
    for (int l = 0; l < L; ++l) {
      const Line& ln = network.lines[l];
      m.add_row(RowSense::Equal, 0.0,
                {{alpha[t * N + ln.from], 1.0},
                 {alpha[t * N + ln.to], -1.0},
                 {beta_p[t * L + l], 1.0},
                 {beta_m[t * L + l], -1.0}});
    }
    for (int g = 0; g < G; ++g) {
      m.add_row(RowSense::Equal, 0.0,
                {{alpha[t * N + network.generators[g].bus], -1.0},
                 {gamma_p[t * G + g], 1.0},
                 {gamma_m[t * G + g], -1.0}});
    }
    for (int i = 0; i < N; ++i) {
      m.add_row(RowSense::Equal, lam.charge,
                {{alpha[t * N + i], 1.0},
                 {tau[t * N + i], -bat.eta_c},
                 {nu_p[t * N + i], 1.0},
                 {nu_m[t * N + i], -1.0}});
      m.add_row(RowSense::Equal, lam.discharge,
                {{alpha[t * N + i], -1.0},
                 {tau[t * N + i], 1.0 / bat.eta_d},
                 {om_p[t * N + i], 1.0},
                 {om_m[t * N + i], -1.0}});
      if (t + 1 < T) {
        m.add_row(RowSense::Equal, 0.0,
                  {{tau[t * N + i], 1.0},
                   {tau[(t + 1) * N + i], -1.0},
                   {mu_p[t * N + i], 1.0},
                   {mu_m[t * N + i], -1.0}});
      } else {
        m.add_row(RowSense::Equal, 0.0,
                  {{tau[t * N + i], 1.0},
                   {mu_p[t * N + i], 1.0},
                   {mu_m[t * N + i], -1.0}});
      }
      m.add_row(RowSense::GreaterEqual, 0.0,
                {{nu_p[t * N + i], bat.ec_min},
                 {nu_m[t * N + i], -bat.ec_max},
                 {om_p[t * N + i], -bat.ed_min},
                 {om_m[t * N + i], bat.ed_max},
                 {phi[t * N + i], 1.0}});
    }
  }
  for (int i = 0; i < N; ++i)
    m.add_row(RowSense::Equal, 0.0, {{tau0[i], 1.0}, {tau[i], -1.0}});
  return out;
}

McCormickModel mccormick_linearize(const DualThirdLevel& dual) {
  for (const auto& b : dual.bilinear) {
    if (dual.model.upper(b.dual_var) >= kInfinity)
      throw std::invalid_argument(
          "bilinear factor unbounded; flow duals must carry their bound");
  }
  McCormickModel out;
  out.n_lines = dual.n_lines;
  out.model = dual.model;
  LinearModel& m = out.model;
  out.y0 = m.num_vars();
  for (int l = 0; l < dual.n_lines; ++l) {
    int y = m.add_var(0.0, 1.0, 0.0, "y_" + std::to_string(l));
    m.set_binary(y);
  }
  int zi = 0;
  for (const auto& b : dual.bilinear) {
    double cap = dual.model.upper(b.dual_var);  // 2 by the dual bound
    int z = m.add_var(0.0, cap, b.coeff, "z_" + std::to_string(zi++));
    int y = out.y0 + b.line;
    // z = y * beta exactly at binary y.
    m.add_row(RowSense::GreaterEqual, -cap,
              {{z, 1.0}, {b.dual_var, -1.0}, {y, -cap}});
    m.add_row(RowSense::LessEqual, 0.0, {{z, 1.0}, {b.dual_var, -1.0}});
    m.add_row(RowSense::LessEqual, 0.0, {{z, 1.0}, {y, -cap}});
  }
  return out;
}

Solution solve_dual_fixed_attack(const DualThirdLevel& dual, const Attack& y) {
  if (static_cast<int>(y.y.size()) != dual.n_lines)
    throw std::invalid_argument("attack size does not match the dual");
  // A frozen attack makes the objective linear: fold y into the flow-dual
  // coefficients (-F + y F, i.e. zero on attacked lines).
  LinearModel m = dual.model;
  for (const auto& b : dual.bilinear) {
    if (y.y[b.line])
      m.set_obj_coeff(b.dual_var, m.obj_coeff(b.dual_var) + b.coeff);
  }
  return solve_lp(m);
}

namespace {

// Nullopt only when the MILP hits the given time budget before proving
// optimality; a cut-short incumbent would understate the attack value and
// must not feed the upper bound.
std::optional<std::pair<Attack, double>> try_worst_attack(
    const Network& network, const DemandScenario& demand, const Placement& x,
    int k, const Lambda& lambda, ThirdLevelVariant variant,
    double time_limit_sec) {
  DualThirdLevel dual = dualize_third_level(network, demand, x, lambda, variant);
  McCormickModel mc = mccormick_linearize(dual);
  LinearModel m = mc.model;
  std::vector<RowEntry> budget;
  for (int l = 0; l < mc.n_lines; ++l) budget.push_back({mc.y0 + l, 1.0});
  if (!budget.empty())
    m.add_row(RowSense::LessEqual, static_cast<double>(k), budget);
  MipOptions opt;
  if (time_limit_sec > 0) opt.time_limit_sec = time_limit_sec;
  Solution s = solve_mip(m, opt);
  if (s.status == SolveStatus::TimeLimit) return std::nullopt;
  if (!s.optimal())
    throw std::runtime_error(std::string("attack subproblem: ") +
                             to_string(s.status));
  Attack best;
  best.budget = k;
  best.y.assign(mc.n_lines, 0);
  for (int l = 0; l < mc.n_lines; ++l)
    best.y[l] = s.primal[mc.y0 + l] > 0.5 ? 1 : 0;
  return std::make_pair(best, s.objective);
}

}  // namespace

std::pair<Attack, double> worst_attack(const Network& network,
                                       const DemandScenario& demand,
                                       const Placement& x, int k,
                                       const Lambda& lambda,
                                       ThirdLevelVariant variant) {
  auto out = try_worst_attack(network, demand, x, k, lambda, variant, -1.0);
  if (!out)
    throw std::runtime_error("attack subproblem: time limit");
  return *out;
}

namespace {

// Appends one relaxed third-level copy to the placement master, coupling
// its battery constraints to the master's placement columns and bounding
// the epigraph variable from below by the copy's cost.
void append_third_level_copy(LinearModel& m, const Network& net,
                             const DemandScenario& dem, const Attack& y,
                             const Lambda& lam, const std::vector<int>& xcol,
                             int xi_col, int copy_id) {
  const int T = dem.horizon;
  const int N = net.num_buses();
  const int L = net.num_lines();
  const int G = static_cast<int>(net.generators.size());
  const BatteryConfig& bat = net.battery;
  auto name = [&](const char* p, int t, int k) {
    return "s" + std::to_string(copy_id) + "_" + p + "_t" +
           std::to_string(t + 1) + "_" + std::to_string(k);
  };
  std::vector<int> flow(T * L), pg(T * G), pc(T * N), pd(T * N), ps(T * N),
      pls(T * N), pex(T * N), u(T * N);
  std::vector<RowEntry> cost;  // cost of this copy, for the epigraph row
  for (int t = 0; t < T; ++t) {
    for (int l = 0; l < L; ++l) {
      double cap = y.y[l] ? 0.0 : net.lines[l].capacity;
      flow[t * L + l] = m.add_var(-cap, cap, 0.0, name("f", t, l));
    }
    for (int g = 0; g < G; ++g)
      pg[t * G + g] = m.add_var(net.generators[g].g_min,
                                net.generators[g].g_max, 0.0, name("pg", t, g));
    for (int i = 0; i < N; ++i) {
      pc[t * N + i] = m.add_var(0.0, bat.ec_max, 0.0, name("pc", t, i));
      pd[t * N + i] = m.add_var(0.0, bat.ed_max, 0.0, name("pd", t, i));
      ps[t * N + i] = m.add_var(0.0, bat.e_max, 0.0, name("ps", t, i));
      pls[t * N + i] = m.add_var(0.0, kInfinity, 0.0, name("pls", t, i));
      pex[t * N + i] = m.add_var(0.0, kInfinity, 0.0, name("pex", t, i));
      u[t * N + i] = m.add_var(0.0, 1.0, 0.0, name("u", t, i));
      cost.push_back({pls[t * N + i], 1.0});
      cost.push_back({pex[t * N + i], 1.0});
      if (lam.charge != 0.0) cost.push_back({pc[t * N + i], lam.charge});
      if (lam.discharge != 0.0) cost.push_back({pd[t * N + i], lam.discharge});
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) {
      // Rate, storage and mode constraints gated by the placement column.
      m.add_row(RowSense::LessEqual, 0.0,
                {{pc[t * N + i], 1.0}, {u[t * N + i], -bat.ec_max}});
      if (bat.ec_min > 0.0)
        m.add_row(RowSense::GreaterEqual, 0.0,
                  {{pc[t * N + i], 1.0}, {u[t * N + i], -bat.ec_min}});
      m.add_row(RowSense::LessEqual, 0.0,
                {{pd[t * N + i], 1.0},
                 {u[t * N + i], bat.ed_max},
                 {xcol[i], -bat.ed_max}});
      if (bat.ed_min > 0.0)
        m.add_row(RowSense::GreaterEqual, 0.0,
                  {{pd[t * N + i], 1.0},
                   {u[t * N + i], bat.ed_min},
                   {xcol[i], -bat.ed_min}});
      m.add_row(RowSense::LessEqual, 0.0,
                {{ps[t * N + i], 1.0}, {xcol[i], -bat.e_max}});
      if (bat.e_min > 0.0)
        m.add_row(RowSense::GreaterEqual, 0.0,
                  {{ps[t * N + i], 1.0}, {xcol[i], -bat.e_min}});
      m.add_row(RowSense::LessEqual, 0.0,
                {{u[t * N + i], 1.0}, {xcol[i], -1.0}});
      std::vector<RowEntry> soc{{ps[t * N + i], 1.0},
                                {pc[t * N + i], -bat.eta_c},
                                {pd[t * N + i], 1.0 / bat.eta_d}};
      if (t == 0)
        soc.push_back({xcol[i], -bat.e0});
      else
        soc.push_back({ps[(t - 1) * N + i], -1.0});
      m.add_row(RowSense::Equal, 0.0, soc);
    }
    for (int i = 0; i < N; ++i) {
      std::vector<RowEntry> bal;
      for (int l = 0; l < L; ++l) {
        if (net.lines[l].from == i) bal.push_back({flow[t * L + l], 1.0});
        if (net.lines[l].to == i) bal.push_back({flow[t * L + l], -1.0});
      }
      for (int g = 0; g < G; ++g)
        if (net.generators[g].bus == i) bal.push_back({pg[t * G + g], -1.0});
      bal.push_back({pc[t * N + i], 1.0});
      bal.push_back({pd[t * N + i], -1.0});
      bal.push_back({pls[t * N + i], -1.0});
      bal.push_back({pex[t * N + i], 1.0});
      m.add_row(RowSense::Equal, -dem.at(t, i), bal);
    }
  }
  // Epigraph: xi >= cost of this scenario copy.
  std::vector<RowEntry> epi{{xi_col, 1.0}};
  for (auto& e : cost) epi.push_back({e.var, -e.coeff});
  m.add_row(RowSense::GreaterEqual, 0.0, epi);
}

struct MasterOutcome {
  Placement x;
  double lower = 0.0;
  bool hit_limit = false;
};

MasterOutcome solve_master(const Network& net, const DemandScenario& dem,
                           const std::vector<Attack>& attacks,
                           const Lambda& lam, int b, double time_left) {
  const int N = net.num_buses();
  LinearModel m;
  int xi = m.add_var(0.0, kInfinity, 1.0, "xi");
  std::vector<int> xcol(N);
  for (int i = 0; i < N; ++i) {
    xcol[i] = m.add_var(0.0, 1.0, 0.0, "x_" + std::to_string(i));
    m.set_binary(xcol[i]);
  }
  std::vector<RowEntry> budget;
  for (int i = 0; i < N; ++i) budget.push_back({xcol[i], 1.0});
  m.add_row(RowSense::LessEqual, static_cast<double>(b), budget);
  int id = 0;
  for (const auto& y : attacks)
    append_third_level_copy(m, net, dem, y, lam, xcol, xi, id++);

  MipOptions opt;
  opt.time_limit_sec = std::max(1.0, time_left);
  Solution s = solve_mip(m, opt);
  bool timed_out_with_incumbent =
      s.status == SolveStatus::TimeLimit && !s.primal.empty();
  if (!s.optimal() && !timed_out_with_incumbent)
    throw std::runtime_error(std::string("placement master: ") +
                             to_string(s.status));
  MasterOutcome out;
  // The proven bound stays a valid lower bound even when the search was
  // cut short; the incumbent placement is still worth probing.
  out.lower = s.optimal() ? s.objective : s.bound;
  out.hit_limit = !s.optimal();
  out.x.budget = b;
  out.x.x.assign(N, 0);
  for (int i = 0; i < N; ++i) out.x.x[i] = s.primal[xcol[i]] > 0.5 ? 1 : 0;
  if (out.hit_limit) return out;

  // Lexicographically smallest placement among the optimal ones, found by
  // fixing one bus at a time. Skipped on large grids where the extra
  // master solves would dominate.
  if (N <= 32) {
    for (int i = 0; i < N; ++i) {
      if (!out.x.x[i]) {
        m.set_bounds(xcol[i], 0.0, 0.0);
        continue;
      }
      m.set_bounds(xcol[i], 0.0, 0.0);
      Solution probe = solve_mip(m, opt);
      if (probe.optimal() && probe.objective <= out.lower + 1e-9) {
        std::vector<char> better(N, 0);
        for (int jj = 0; jj < N; ++jj)
          better[jj] = probe.primal[xcol[jj]] > 0.5 ? 1 : 0;
        out.x.x = better;
      } else {
        m.set_bounds(xcol[i], 1.0, 1.0);
      }
    }
  }
  return out;
}

TrilevelRun run_ccg(const Network& net, const DemandScenario& dem, int b,
                    int k, const Lambda& lam, ThirdLevelVariant variant,
                    const TrilevelStop& stop) {
  auto t0 = std::chrono::steady_clock::now();
  auto left = [&] {
    double el =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return stop.time_limit_sec - el;
  };
  TrilevelRun run;
  std::vector<Attack> attacks;
  Attack none;
  none.budget = k;
  none.y.assign(net.num_lines(), 0);
  attacks.push_back(none);
  run.worst_y = none;
  run.upper = kInfinity;
  run.status = TrilevelStatus::IterationLimit;
  for (int it = 1; it <= stop.max_iterations; ++it) {
    run.iterations = it;
    MasterOutcome master = solve_master(net, dem, attacks, lam, b, left());
    run.lower = std::max(run.lower, master.lower);
    auto sub = try_worst_attack(net, dem, master.x, k, lam, variant,
                                std::max(left(), 1e-9));
    if (!sub || master.hit_limit) {
      if (sub && sub->second < run.upper - 1e-12) {
        run.upper = sub->second;
        run.best_x = master.x;
        run.worst_y = sub->first;
      }
      run.lb_history.push_back(run.lower);
      run.ub_history.push_back(run.upper);
      run.status = TrilevelStatus::TimeLimit;
      break;
    }
    auto [atk, value] = *sub;
    if (value < run.upper - 1e-12) {
      run.upper = value;
      run.best_x = master.x;
      run.worst_y = atk;
    }
    run.lb_history.push_back(run.lower);
    run.ub_history.push_back(run.upper);
    double gap = std::abs(run.upper - run.lower) /
                 std::max(std::abs(run.upper), 1e-9);
    if (run.upper == 0.0 && run.lower == 0.0) gap = 0.0;
    if (gap <= stop.gap) {
      run.status = TrilevelStatus::Converged;
      break;
    }
    bool seen = std::find(attacks.begin(), attacks.end(), atk) != attacks.end();
    if (seen) {
      run.status = TrilevelStatus::Stalled;
      break;
    }
    attacks.push_back(atk);
    if (left() <= 0) {
      run.status = TrilevelStatus::TimeLimit;
      break;
    }
  }
  if (run.best_x.x.empty()) {
    run.best_x.budget = b;
    run.best_x.x.assign(net.num_buses(), 0);
  }
  return run;
}

}  // namespace

TrilevelResult solve_trilevel(const Network& network,
                              const DemandScenario& demand, int b, int k,
                              const Lambda& lambda, const TrilevelStop& stop) {
  if (network.battery.ec_min != 0.0 || network.battery.ed_min != 0.0)
    throw std::invalid_argument(
        "trilevel solve requires zero minimum charge/discharge rates");
  if (!zero_gap_lambda_ok(lambda, network.battery.eta_c,
                          network.battery.eta_d))
    throw std::invalid_argument(
        "penalty too small for the regularized trilevel run");
  auto t0 = std::chrono::steady_clock::now();
  TrilevelResult r;
  r.network_name = network.name;
  r.b = b;
  r.k = k;
  r.reg = run_ccg(network, demand, b, k, lambda, ThirdLevelVariant::Reg, stop);
  r.lp = run_ccg(network, demand, b, k, {}, ThirdLevelVariant::LPRelax, stop);
  auto rel = [](double hi, double lo) {
    if (hi == 0.0 && lo == 0.0) return 0.0;
    return std::abs(hi - lo) / std::max(std::abs(hi), 1e-9);
  };
  r.solution_gap = rel(r.reg.upper, r.lp.lower);
  r.trilevel_gap_reg = rel(r.reg.upper, r.reg.lower);
  r.trilevel_gap_lp = rel(r.lp.upper, r.lp.lower);
  r.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return r;
}

double brute_force_trilevel(const Network& network,
                            const DemandScenario& demand, int b, int k) {
  const int N = network.num_buses();
  const int L = network.num_lines();
  auto subsets_up_to = [](int n, int budget) {
    double total = 0.0, c = 1.0;
    for (int j = 0; j <= std::min(budget, n); ++j) {
      if (j > 0) c = c * (n - j + 1) / j;
      total += c;
    }
    return total;
  };
  if (subsets_up_to(N, b) * subsets_up_to(L, k) > 1e5)
    throw std::invalid_argument("enumeration exceeds the 1e5 subset budget");

  // All index subsets of size 0..budget, in size-then-lexicographic order.
  auto subsets = [](int n, int budget) {
    std::vector<std::vector<char>> out;
    out.emplace_back(n, 0);
    std::vector<int> pick;
    for (int size = 1; size <= std::min(budget, n); ++size) {
      pick.assign(size, 0);
      for (int i = 0; i < size; ++i) pick[i] = i;
      while (true) {
        std::vector<char> mask(n, 0);
        for (int i : pick) mask[i] = 1;
        out.push_back(std::move(mask));
        int pos = size - 1;
        while (pos >= 0 && pick[pos] == n - size + pos) --pos;
        if (pos < 0) break;
        ++pick[pos];
        for (int i = pos + 1; i < size; ++i) pick[i] = pick[i - 1] + 1;
      }
    }
    return out;
  };
  std::vector<Placement> placements;
  for (auto& mask : subsets(N, b)) {
    Placement p;
    p.budget = b;
    p.x = std::move(mask);
    placements.push_back(std::move(p));
  }
  std::vector<Attack> attacks;
  for (auto& mask : subsets(L, k)) {
    Attack a;
    a.budget = k;
    a.y = std::move(mask);
    attacks.push_back(std::move(a));
  }

  double best = kInfinity;
  for (const auto& x : placements) {
    double worst = -kInfinity;
    for (const auto& y : attacks) {
      OpfModel m = build_third_level(network, demand, x, y, {},
                                     ThirdLevelVariant::ExactMIP);
      Solution s = m.model.num_binaries() > 0 ? solve_mip(m.model)
                                              : solve_lp(m.model);
      if (!s.optimal())
        throw std::runtime_error("reference enumeration: inner solve failed");
      worst = std::max(worst, s.objective);
      if (worst >= best) break;  // cannot improve this placement
    }
    best = std::min(best, worst);
  }
  return best;
}

std::string trilevel_result_to_json(const TrilevelResult& r) {
  auto hist = [&](const std::vector<double>& h) {
    std::string s = "[";
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (i) s += ",";
      s += num(h[i]);
    }
    return s + "]";
  };
  auto mask = [&](const std::vector<char>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += v[i] ? "1" : "0";
    }
    return s + "]";
  };
  std::ostringstream out;
  out << "{\"network\":\"" << r.network_name << "\",\"b\":" << r.b
      << ",\"k\":" << r.k << ",\"reg\":{\"upper\":" << num(r.reg.upper)
      << ",\"lower\":" << num(r.reg.lower) << ",\"status\":\""
      << to_string(r.reg.status) << "\",\"iterations\":" << r.reg.iterations
      << ",\"ub_history\":" << hist(r.reg.ub_history)
      << ",\"lb_history\":" << hist(r.reg.lb_history)
      << ",\"best_x\":" << mask(r.reg.best_x.x)
      << ",\"worst_y\":" << mask(r.reg.worst_y.y) << "}"
      << ",\"lp\":{\"upper\":" << num(r.lp.upper)
      << ",\"lower\":" << num(r.lp.lower) << ",\"status\":\""
      << to_string(r.lp.status) << "\",\"iterations\":" << r.lp.iterations
      << ",\"ub_history\":" << hist(r.lp.ub_history)
      << ",\"lb_history\":" << hist(r.lp.lb_history) << "}"
      << ",\"solution_gap\":" << num(r.solution_gap)
      << ",\"trilevel_gap_reg\":" << num(r.trilevel_gap_reg)
      << ",\"trilevel_gap_lp\":" << num(r.trilevel_gap_lp)
      << ",\"wall_time_sec\":" << num(r.wall_time_sec) << "}";
  return out.str();
}

std::string trilevel_csv_header() {
  return "network,b,k,z_reg_ub,z_reg_lb,z_lp_lb,solution_gap,trilevel_gap_reg,"
         "trilevel_gap_lp,iters,seconds\n";
}

std::string trilevel_result_to_csv_row(const TrilevelResult& r) {
  std::ostringstream out;
  out << r.network_name << ',' << r.b << ',' << r.k << ',' << num(r.reg.upper)
      << ',' << num(r.reg.lower) << ',' << num(r.lp.lower) << ','
      << num(r.solution_gap) << ',' << num(r.trilevel_gap_reg) << ','
      << num(r.trilevel_gap_lp) << ',' << r.reg.iterations + r.lp.iterations
      << ',' << num(r.wall_time_sec) << '\n';
  return out.str();
}

}  // namespace gridess
