#include "gridess/opf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gridess {

OpfModel build_opf(const Network& network, const DemandScenario& demand,
                   const Lambda& lambda, const ModelVariant& variant) {
  network.validate();
  if (lambda.charge < 0 || lambda.discharge < 0)
    throw std::invalid_argument("regularizer must be nonnegative");
  if (demand.horizon < 1) throw std::invalid_argument("demand horizon must be >= 1");
  if (demand.num_buses() != network.num_buses())
    throw std::invalid_argument("demand bus count does not match the network");
  const bool uses_battery = variant.tag != OpfVariant::NoBattery;
  const auto battery = network.battery_buses();
  if (uses_battery && battery.empty())
    throw std::invalid_argument("variant requires battery buses");

  const int T = demand.horizon;
  const int N = network.num_buses();
  const int L = network.num_lines();
  const int G = static_cast<int>(network.generators.size());
  const BatteryConfig& bat = network.battery;

  OpfModel out;
  out.variant = variant;
  // The exact and no-battery models carry no regularizer by definition.
  out.lambda = (variant.tag == OpfVariant::BatteryMIP ||
                variant.tag == OpfVariant::NoBattery)
                   ? Lambda{}
                   : lambda;
  for (const auto& g : network.generators) {
    out.gen_bus.push_back(g.bus);
    out.gen_cost.push_back(g.cost_coeff);
  }
  OpfIndex& ix = out.index;
  ix.horizon = T;
  ix.n_buses = N;
  ix.n_lines = L;
  ix.n_gens = G;
  ix.has_theta = variant.include_ohms_law;
  LinearModel& m = out.model;

  std::vector<char> has_bat(N, 0);
  for (int b : battery) has_bat[b] = 1;

  auto block = [&](double lo, double up, double obj, const char* prefix,
                   int per_t) {
    int start = m.num_vars();
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < per_t; ++k)
        m.add_var(lo, up, obj,
                  std::string(prefix) + "_t" + std::to_string(t + 1) + "_" +
                      std::to_string(k));
    return start;
  };

  if (ix.has_theta) ix.theta0 = block(-kInfinity, kInfinity, 0.0, "th", N);
  ix.flow0 = m.num_vars();
  for (int t = 0; t < T; ++t)
    for (int l = 0; l < L; ++l)
      m.add_var(-network.lines[l].capacity, network.lines[l].capacity, 0.0,
                "f_t" + std::to_string(t + 1) + "_" + std::to_string(l));
  ix.pg0 = m.num_vars();
  for (int t = 0; t < T; ++t)
    for (int g = 0; g < G; ++g)
      m.add_var(network.generators[g].g_min, network.generators[g].g_max,
                network.generators[g].cost_coeff,
                "pg_t" + std::to_string(t + 1) + "_" + std::to_string(g));
  ix.pc0 = block(0.0, 0.0, out.lambda.charge, "pc", N);
  ix.pd0 = block(0.0, 0.0, out.lambda.discharge, "pd", N);
  ix.ps0 = block(0.0, 0.0, 0.0, "ps", N);
  ix.pls0 = block(0.0, kInfinity, 1.0, "pls", N);
  ix.pex0 = block(0.0, kInfinity, 1.0, "pex", N);
  ix.u0 = block(0.0, 0.0, 0.0, "u", N);
  ix.num_vars = m.num_vars();

  // Battery column bounds; non-battery buses stay fixed at zero.
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) {
      if (!has_bat[i] || !uses_battery) continue;
      m.set_bounds(ix.pc(t, i), 0.0, bat.ec_max);
      m.set_bounds(ix.pd(t, i), 0.0, bat.ed_max);
      m.set_bounds(ix.ps(t, i), bat.e_min, bat.e_max);
      m.set_bounds(ix.u(t, i), 0.0, 1.0);
      if (variant.tag == OpfVariant::BatteryMIP ||
          variant.tag == OpfVariant::RegBatteryMIP)
        m.set_binary(ix.u(t, i));
    }
  }
  if (variant.tag == OpfVariant::NoBattery) {
    // Storage still exists but cannot move: state pinned at the initial level.
    for (int t = 0; t < T; ++t)
      for (int i : battery) m.set_bounds(ix.ps(t, i), bat.e0, bat.e0);
  }

  // Angle reference: lowest-indexed bus of each connected component.
  if (ix.has_theta) {
    auto comp = network.component_of_bus();
    std::set<int> refs(comp.begin(), comp.end());
    for (int t = 0; t < T; ++t)
      for (int r : refs) m.set_bounds(ix.theta(t, r), 0.0, 0.0);
  }

  for (int t = 0; t < T; ++t) {
    if (ix.has_theta) {
      for (int l = 0; l < L; ++l) {
        const Line& ln = network.lines[l];
        m.add_row(RowSense::Equal, 0.0,
                  {{ix.flow(t, l), 1.0},
                   {ix.theta(t, ln.from), -ln.susceptance},
                   {ix.theta(t, ln.to), ln.susceptance}});
      }
    }
    if (uses_battery) {
      for (int i : battery) {
        // Charge and discharge rates tied to the mode indicator.
        m.add_row(RowSense::LessEqual, 0.0,
                  {{ix.pc(t, i), 1.0}, {ix.u(t, i), -bat.ec_max}});
        if (bat.ec_min > 0.0)
          m.add_row(RowSense::GreaterEqual, 0.0,
                    {{ix.pc(t, i), 1.0}, {ix.u(t, i), -bat.ec_min}});
        m.add_row(RowSense::LessEqual, bat.ed_max,
                  {{ix.pd(t, i), 1.0}, {ix.u(t, i), bat.ed_max}});
        if (bat.ed_min > 0.0)
          m.add_row(RowSense::GreaterEqual, bat.ed_min,
                    {{ix.pd(t, i), 1.0}, {ix.u(t, i), bat.ed_min}});
        // State of charge recursion.
        std::vector<RowEntry> soc{{ix.ps(t, i), 1.0},
                                  {ix.pc(t, i), -bat.eta_c},
                                  {ix.pd(t, i), 1.0 / bat.eta_d}};
        if (t == 0) {
          m.add_row(RowSense::Equal, bat.e0, soc);
        } else {
          soc.push_back({ix.ps(t - 1, i), -1.0});
          m.add_row(RowSense::Equal, 0.0, soc);
        }
      }
    }
    for (int i = 0; i < N; ++i) {
      // Power balance: net outflow = generation - demand - charge
      //                + discharge + shed - excess.
      std::vector<RowEntry> bal;
      for (int l = 0; l < L; ++l) {
        if (network.lines[l].from == i) bal.push_back({ix.flow(t, l), 1.0});
        if (network.lines[l].to == i) bal.push_back({ix.flow(t, l), -1.0});
      }
      for (int g = 0; g < G; ++g)
        if (network.generators[g].bus == i) bal.push_back({ix.pg(t, g), -1.0});
      bal.push_back({ix.pc(t, i), 1.0});
      bal.push_back({ix.pd(t, i), -1.0});
      bal.push_back({ix.pls(t, i), -1.0});
      bal.push_back({ix.pex(t, i), 1.0});
      m.add_row(RowSense::Equal, -demand.at(t, i), bal);
    }
  }
  return out;
}

namespace {

std::vector<std::vector<double>> slice(const std::vector<double>& x, int base,
                                       int T, int width) {
  std::vector<std::vector<double>> out(T, std::vector<double>(width, 0.0));
  if (base < 0) return out;
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < width; ++k) out[t][k] = x[base + t * width + k];
  return out;
}

}  // namespace

DispatchSolution extract_dispatch(const OpfModel& opf, const Solution& sol) {
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error(std::string("cannot extract dispatch from a ") +
                             to_string(sol.status) + " solution");
  const OpfIndex& ix = opf.index;
  const int T = ix.horizon, N = ix.n_buses, L = ix.n_lines;
  DispatchSolution d;
  d.horizon = T;
  d.n_buses = N;
  d.n_lines = L;
  d.theta = slice(sol.primal, ix.theta0, T, N);
  d.flow = slice(sol.primal, ix.flow0, T, L);
  d.p_c = slice(sol.primal, ix.pc0, T, N);
  d.p_d = slice(sol.primal, ix.pd0, T, N);
  d.p_s = slice(sol.primal, ix.ps0, T, N);
  d.p_ls = slice(sol.primal, ix.pls0, T, N);
  d.p_ex = slice(sol.primal, ix.pex0, T, N);
  d.u = slice(sol.primal, ix.u0, T, N);
  d.p_g.assign(T, std::vector<double>(N, 0.0));

  // Recompute c(p) from the primal values, independent of the solver's
  // reported objective.
  double gen_cost = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int g = 0; g < ix.n_gens; ++g) {
      double pg = sol.primal[ix.pg(t, g)];
      d.p_g[t][opf.gen_bus[g]] += pg;
      gen_cost += opf.gen_cost[g] * pg;
    }
  }
  double slack_cost = 0.0;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i) slack_cost += d.p_ls[t][i] + d.p_ex[t][i];
  d.objective_c = gen_cost + slack_cost;
  d.objective_reg = d.objective_c + opf.lambda.charge * d.total_charge() +
                    opf.lambda.discharge * d.total_discharge();
  if (std::abs(d.objective_reg - sol.objective) > 1e-6)
    throw std::runtime_error("dispatch objective mismatch: recomputed " +
                             std::to_string(d.objective_reg) + " vs solver " +
                             std::to_string(sol.objective));
  return d;
}

double DispatchSolution::total_charge() const {
  double s = 0.0;
  for (const auto& row : p_c)
    for (double v : row) s += v;
  return s;
}

double DispatchSolution::total_discharge() const {
  double s = 0.0;
  for (const auto& row : p_d)
    for (double v : row) s += v;
  return s;
}

double DispatchSolution::max_product_pc_pls() const {
  double m = 0.0;
  for (int t = 0; t < horizon; ++t)
    for (int i = 0; i < n_buses; ++i)
      m = std::max(m, p_c[t][i] * p_ls[t][i]);
  return m;
}

double DispatchSolution::max_product_pd_pex() const {
  double m = 0.0;
  for (int t = 0; t < horizon; ++t)
    for (int i = 0; i < n_buses; ++i)
      m = std::max(m, p_d[t][i] * p_ex[t][i]);
  return m;
}

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string dispatch_to_csv(const DispatchSolution& d) {
  std::ostringstream out;
  out << "t,bus,p_g,p_c,p_d,p_s,p_ls,p_ex,u\n";
  for (int t = 0; t < d.horizon; ++t)
    for (int i = 0; i < d.n_buses; ++i)
      out << (t + 1) << ',' << i << ',' << num(d.p_g[t][i]) << ','
          << num(d.p_c[t][i]) << ',' << num(d.p_d[t][i]) << ','
          << num(d.p_s[t][i]) << ',' << num(d.p_ls[t][i]) << ','
          << num(d.p_ex[t][i]) << ',' << num(d.u[t][i]) << '\n';
  return out.str();
}

std::string dispatch_to_json(const DispatchSolution& d) {
  auto matrix = [&](const std::vector<std::vector<double>>& m) {
    std::string s = "[";
    for (std::size_t t = 0; t < m.size(); ++t) {
      s += t ? ",[" : "[";
      for (std::size_t i = 0; i < m[t].size(); ++i) {
        if (i) s += ",";
        s += num(m[t][i]);
      }
      s += "]";
    }
    s += "]";
    return s;
  };
  std::string s = "{";
  s += "\"horizon\":" + std::to_string(d.horizon);
  s += ",\"objective_c\":" + num(d.objective_c);
  s += ",\"objective_reg\":" + num(d.objective_reg);
  s += ",\"theta\":" + matrix(d.theta);
  s += ",\"flow\":" + matrix(d.flow);
  s += ",\"p_g\":" + matrix(d.p_g);
  s += ",\"p_c\":" + matrix(d.p_c);
  s += ",\"p_d\":" + matrix(d.p_d);
  s += ",\"p_s\":" + matrix(d.p_s);
  s += ",\"p_ls\":" + matrix(d.p_ls);
  s += ",\"p_ex\":" + matrix(d.p_ex);
  s += ",\"u\":" + matrix(d.u);
  s += "}";
  return s;
}

}  // namespace gridess
