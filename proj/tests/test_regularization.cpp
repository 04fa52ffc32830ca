#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gridess/branch_bound.hpp"
#include "gridess/regularization.hpp"
#include "gridess/simplex.hpp"
#include "random_instances.hpp"

using namespace gridess;
using namespace fixtures;

TEST_CASE("zero gap condition") {
  CHECK(zero_gap_lambda_ok({0.0, 0.0}, 1.0, 1.0));
  // round trip 1/3: 0.4 + 0.4 / 3 = 0.5333 < 2/3
  double eta = 1.0 / std::sqrt(3.0);
  CHECK_FALSE(zero_gap_lambda_ok({0.4, 0.4}, eta, eta));
  // equality case at 0.9 * 0.9
  double l = 19.0 / 181.0;
  CHECK(zero_gap_lambda_ok({l, l}, 0.9, 0.9));
  CHECK_FALSE(zero_gap_lambda_ok({l - 1e-6, l}, 0.9, 0.9));
  CHECK_THROWS(zero_gap_lambda_ok({0, 0}, 0.0, 1.0));
}

TEST_CASE("penalty with the best worst-case bound") {
  Lambda a = best_worst_case_lambda(2.0, 2.0, 0.9, 0.9);
  CHECK(a.charge == doctest::Approx(19.0 / 181.0).epsilon(1e-12));
  CHECK(a.discharge == doctest::Approx(19.0 / 181.0).epsilon(1e-12));

  Lambda b = best_worst_case_lambda(1.0, 1.0, 1.0, 1.0);
  CHECK(b.charge == doctest::Approx(0.0));
  CHECK(b.discharge == doctest::Approx(0.0));

  Lambda c = best_worst_case_lambda(0.95, 0.95, 0.95, 0.95);
  CHECK(c.charge == doctest::Approx(0.0975 / 1.9025).epsilon(1e-9));

  // Properties: condition met with equality and balanced products.
  for (auto [ec, ed, etc, etd] :
       {std::tuple{0.5, 1.5, 0.85, 0.95}, std::tuple{2.0, 0.7, 0.9, 0.8}}) {
    Lambda lam = best_worst_case_lambda(ec, ed, etc, etd);
    double rt = etc * etd;
    CHECK(lam.charge + rt * lam.discharge == doctest::Approx(1.0 - rt).epsilon(1e-12));
    CHECK(ec * lam.charge == doctest::Approx(ed * lam.discharge).epsilon(1e-12));
    CHECK(zero_gap_lambda_ok(lam, etc, etd));
  }
}

TEST_CASE("worst case gap bound") {
  CHECK(worst_case_gap_bound(5, 3, 1.0, 1.0, {0.0, 0.0}) == 0.0);
  Lambda lam = best_worst_case_lambda(0.95, 0.95, 0.95, 0.95);
  CHECK(worst_case_gap_bound(24, 2, 0.95, 0.95, lam) ==
        doctest::Approx(2.3369).epsilon(1e-4));
  for (double l : {0.1, 0.3}) {
    CHECK(worst_case_gap_bound(2, 1, 1.0, 1.0, {l, l}) ==
          doctest::Approx(2 * l));
  }
  CHECK_THROWS(worst_case_gap_bound(0, 1, 1, 1, {0, 0}));
}

TEST_CASE("integralize pointwise mapping") {
  Network net = ex5_network();  // eta 0.9 x 0.9 = 0.81
  // Hand-built consistent dispatch at the battery bus (bus 1).
  DispatchSolution d;
  d.horizon = 1;
  d.n_buses = 2;
  d.n_lines = 1;
  auto zeros = std::vector<std::vector<double>>(1, std::vector<double>(2, 0.0));
  d.theta = d.flow = zeros;
  d.flow[0].resize(1);
  d.p_g = d.p_c = d.p_d = d.p_s = d.p_ls = d.p_ex = d.u = zeros;
  d.p_c[0][1] = 1.0;
  d.p_s[0][1] = net.battery.e0 + 0.9 * 1.0;
  d.objective_c = 0.0;
  DispatchSolution r = integralize(d, net, {0.0, 0.0});
  CHECK(r.p_c[0][1] == doctest::Approx(1.0));  // already complementary
  CHECK(r.p_d[0][1] == doctest::Approx(0.0));
  CHECK(r.u[0][1] == 1.0);

  // Simultaneous charge and discharge collapses to the discharge side.
  BatteryConfig loose = net.battery;
  loose.eta_c = loose.eta_d = 0.95;  // round trip 0.9025
  loose.e_max = 10.0;
  Network net2 = net;
  net2.battery = loose;
  d.p_c[0][1] = 0.6;
  d.p_d[0][1] = 0.9;
  d.p_ex[0][1] = 0.3;  // net discharge feeds surplus
  d.p_s[0][1] = loose.e0 + 0.95 * 0.6 - 0.9 / 0.95;
  d.objective_c = 0.3;
  DispatchSolution r2 = integralize(d, net2, {0.1, 0.1});
  CHECK(r2.p_c[0][1] == doctest::Approx(0.0));
  CHECK(r2.p_d[0][1] == doctest::Approx(0.9 - 0.9025 * 0.6).epsilon(1e-9));
  CHECK(r2.p_d[0][1] == doctest::Approx(0.3585).epsilon(1e-6));
  CHECK(r2.p_c[0][1] * r2.p_d[0][1] == 0.0);
  CHECK(r2.u[0][1] == 0.0);
  // Balance net kept: -pc + pd + pls - pex is preserved pointwise.
  double before = -0.6 + 0.9 + 0.0 - 0.3;
  double after = -r2.p_c[0][1] + r2.p_d[0][1] + r2.p_ls[0][1] - r2.p_ex[0][1];
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("integralize refuses positive minimum rates") {
  Network net = ex1_network(0.5);
  OpfModel m = build_opf(net, ex1_demand(), {0.6, 0.6},
                         variant(OpfVariant::RegBatteryLP));
  Solution s = solve_lp(m.model);
  DispatchSolution d = extract_dispatch(m, s);
  CHECK_THROWS_AS(integralize(d, net, {0.6, 0.6}), std::invalid_argument);
}

TEST_CASE("integralize turns relaxed optima into complementary points") {
  // Study case 2 has a fractional relaxation optimum with simultaneous
  // charge and discharge; the rebuilt point must be feasible, complementary
  // and no worse in the regularized objective.
  Network net = ex2_network();
  // Complementarity holds for any penalty, even an under-sized one.
  Lambda weak{0.2, 0.2};
  OpfModel lp = build_opf(net, ex2_demand(), weak, variant(OpfVariant::RegBatteryLP));
  DispatchSolution d = extract_dispatch(lp, solve_lp(lp.model));
  DispatchSolution r = integralize(d, net, weak);
  for (int t = 0; t < r.horizon; ++t)
    for (int i = 0; i < r.n_buses; ++i)
      CHECK(r.p_c[t][i] * r.p_d[t][i] == doctest::Approx(0.0));

  // With the condition met the rebuilt point is also never worse.
  const auto& b = net.battery;
  Lambda lam = best_worst_case_lambda(b.ec_max, b.ed_max, b.eta_c, b.eta_d);
  OpfModel lp2 = build_opf(net, ex2_demand(), lam, variant(OpfVariant::RegBatteryLP));
  DispatchSolution d2 = extract_dispatch(lp2, solve_lp(lp2.model));
  DispatchSolution r2 = integralize(d2, net, lam);
  for (int t = 0; t < r2.horizon; ++t)
    for (int i = 0; i < r2.n_buses; ++i)
      CHECK(r2.p_c[t][i] * r2.p_d[t][i] == doctest::Approx(0.0));
  CHECK(r2.objective_reg <= d2.objective_reg + 1e-9);
}

TEST_CASE("gap measurement on the counterexample and on a safe penalty") {
  Network net = ex2_network();
  GapReport bad = measure_zero_gap(net, ex2_demand(), {0.0, 0.0});
  CHECK(bad.abs_gap == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_FALSE(bad.zero_gap_condition_met);

  const auto& b = net.battery;
  Lambda lam = best_worst_case_lambda(b.ec_max, b.ed_max, b.eta_c, b.eta_d);
  GapReport good = measure_zero_gap(net, ex2_demand(), lam);
  CHECK(good.zero_gap_condition_met);
  CHECK(std::abs(good.abs_gap) <= 1e-6);
}

TEST_CASE("structure report on the lossy study case") {
  Network net = ex4_network();
  OpfModel m = build_opf(net, ex4_demand(), {}, variant(OpfVariant::BatteryMIP));
  DispatchSolution d = extract_dispatch(m, solve_mip(m.model));
  StructureReport r0 = check_structure(d, {0.0, 0.0}, 0.1, 0.1);
  CHECK(r0.max_pd_pex == doctest::Approx(9e-4).epsilon(1e-6));
  CHECK_FALSE(r0.condition_strict);
  CHECK(r0.ok_pc_pls);

  Lambda high{0.99, 0.99};
  OpfModel m2 = build_opf(net, ex4_demand(), high, variant(OpfVariant::RegBatteryMIP));
  DispatchSolution d2 = extract_dispatch(m2, solve_mip(m2.model));
  StructureReport r2 = check_structure(d2, high, 0.1, 0.1);
  CHECK(r2.condition_strict);
  CHECK(r2.max_pd_pex <= 1e-9);
  CHECK(r2.ok_pd_pex);
}

TEST_CASE("structure holds on randomized optima") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testgen::random_instance(rng, 4, 4);
    const auto& b = inst.network.battery;
    Lambda lam = best_worst_case_lambda(b.ec_max, b.ed_max, b.eta_c, b.eta_d);
    StructureVerification v = verify_structure(inst.network, inst.demand, lam);
    CHECK(v.report.ok_pc_pls);
    CHECK_FALSE(v.genuine_violation);
  }
}

TEST_CASE("repair adjustments strictly improve seeded violations") {
  // Feasible but suboptimal point that charges while shedding.
  Network net = ex5_network();
  DispatchSolution d;
  d.horizon = 2;
  d.n_buses = 2;
  d.n_lines = 1;
  auto zeros = std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0));
  d.theta = d.p_g = d.p_c = d.p_d = d.p_s = d.p_ls = d.p_ex = d.u = zeros;
  d.flow.assign(2, std::vector<double>(1, 0.0));
  d.p_c[0][1] = 1.0;
  d.p_ls[0][1] = 1.5;
  d.p_s[0][1] = net.battery.e0 + 0.9;
  d.p_d[1][1] = 0.5;
  d.p_s[1][1] = d.p_s[0][1] - 0.5 / 0.9;
  d.u[0][1] = 1.0;
  d.objective_c = 1.5;
  Lambda lam{0.1, 0.1};
  d.objective_reg = d.objective_c + lam.charge * 1.0 + lam.discharge * 0.5;

  DispatchSolution r = detail::repair_charge_shedding(d, net, 1, lam);
  CHECK(r.p_c[0][1] * r.p_ls[0][1] == doctest::Approx(0.0));
  CHECK(r.objective_reg < d.objective_reg - 1e-9);
  // State of charge stays within its box after the walk.
  for (int t = 0; t < 2; ++t) {
    CHECK(r.p_s[t][1] >= net.battery.e_min - 1e-9);
    CHECK(r.p_s[t][1] <= net.battery.e_max + 1e-9);
  }

  // And the mirrored case: discharging into excess power.
  DispatchSolution e = d;
  e.p_c = zeros;
  e.p_d = zeros;
  e.p_ls = zeros;
  e.p_ex = zeros;
  e.u = zeros;
  e.p_d[0][1] = 0.9;
  e.p_ex[0][1] = 1.2;
  e.p_s[0][1] = net.battery.e0 - 1.0;
  e.p_c[1][1] = 2.0;
  e.p_s[1][1] = e.p_s[0][1] + 0.9 * 2.0;
  e.u[1][1] = 1.0;
  e.objective_c = 1.2;
  e.objective_reg = e.objective_c + lam.charge * 2.0 + lam.discharge * 0.9;
  DispatchSolution r2 = detail::repair_discharge_excess(e, net, 1, lam);
  CHECK(r2.p_d[0][1] * r2.p_ex[0][1] == doctest::Approx(0.0));
  CHECK(r2.objective_reg < e.objective_reg - 1e-9);
  for (int t = 0; t < 2; ++t)
    CHECK(r2.p_s[t][1] <= net.battery.e_max + 1e-9);
}

TEST_CASE("exactness certificate on the recovery study case") {
  Network net = ex5_network();
  Lambda lam{19.0 / 181.0, 19.0 / 181.0};
  ExactnessReport r = check_exactness_bruteforce(net, ex5_demand(), lam);
  CHECK(r.z_ori == doctest::Approx(4.2).epsilon(1e-9));
  CHECK(r.delta == doctest::Approx(1.8).epsilon(1e-9));
  CHECK(r.min_lambda_g == doctest::Approx(1.8 * 19.0 / 181.0).epsilon(1e-6));
  CHECK(r.min_lambda_g == doctest::Approx(0.18895).epsilon(1e-4));
  CHECK(r.exact);
  CHECK(r.reg_u_recovered);
  CHECK(r.optimal_patterns == 2);
}

TEST_CASE("exactness is trivial for a lossless battery at zero penalty") {
  Network net = ex3_network();
  ExactnessReport r = check_exactness_bruteforce(net, ex3_demand(), {0.0, 0.0});
  CHECK(r.exact);
  CHECK(r.min_lambda_g == doctest::Approx(0.0));
}

TEST_CASE("oversized penalties defeat the certificate") {
  Network net = ex5_network();
  ExactnessReport r = check_exactness_bruteforce(net, ex5_demand(), {10.0, 10.0});
  CHECK(r.min_lambda_g == doctest::Approx(18.0).epsilon(1e-6));
  CHECK_FALSE(r.exact);
}

TEST_CASE("enumeration budget is enforced") {
  Network net = ex5_network();
  DemandScenario big;
  big.horizon = 21;
  big.values.assign(21, std::vector<double>(2, 1.0));
  CHECK_THROWS_AS(check_exactness_bruteforce(net, big, {0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("unit penalties reduce to the no-battery model") {
  Network zero_net = ex3_network();
  for (auto& g : zero_net.generators) g.g_min = 0.0;
  DemandScenario zero = fixtures::demand({{0.0, 0.0}, {0.0, 0.0}});
  CHECK(no_battery_equivalence(zero_net, zero));

  Network net = ex3_network();
  CHECK(no_battery_equivalence(net, ex3_demand()));

  // Below unit penalties the battery strictly helps on the same case.
  Lambda half{0.5, 0.5};
  OpfModel reg = build_opf(net, ex3_demand(), half, variant(OpfVariant::RegBatteryMIP));
  OpfModel nb = build_opf(net, ex3_demand(), {}, variant(OpfVariant::NoBattery));
  Solution sreg = solve_mip(reg.model);
  Solution snb = solve_lp(nb.model);
  CHECK(sreg.objective < snb.objective - 1e-6);
  DispatchSolution d = extract_dispatch(reg, sreg);
  CHECK(d.p_d[0][1] == doctest::Approx(2.0));
  CHECK(d.p_d[1][1] == doctest::Approx(2.0));
}

TEST_CASE("sweep case: recovery kicks in at the higher efficiency") {
  // At the lowest efficiency the penalized optimum costs strictly more in
  // the original metric; at the highest it recovers the exact optimum.
  auto costs = [&](double eta) {
    Network net = ex6_network(eta);
    double rt = eta * eta;
    Lambda lam{(1 - rt) / (1 + rt), (1 - rt) / (1 + rt)};
    OpfModel exact = build_opf(net, ex6_demand(), {}, variant(OpfVariant::BatteryMIP));
    OpfModel reg = build_opf(net, ex6_demand(), lam, variant(OpfVariant::RegBatteryMIP));
    double c_star = extract_dispatch(exact, solve_mip(exact.model)).objective_c;
    double c_hat = extract_dispatch(reg, solve_mip(reg.model)).objective_c;
    return std::pair{c_star, c_hat};
  };
  auto [lo_star, lo_hat] = costs(1.0 / std::sqrt(2.1));
  CHECK(lo_hat > lo_star + 1e-6);
  auto [hi_star, hi_hat] = costs(1.0 / std::sqrt(1.9));
  CHECK(hi_hat == doctest::Approx(hi_star).epsilon(1e-9));

  // Unit penalties on the same case collapse to the storage-disabled value.
  Network net = ex6_network(1.0 / std::sqrt(1.9));
  OpfModel reg = build_opf(net, ex6_demand(), {1.0, 1.0},
                           variant(OpfVariant::RegBatteryMIP));
  OpfModel nb = build_opf(net, ex6_demand(), {}, variant(OpfVariant::NoBattery));
  CHECK(solve_mip(reg.model).objective ==
        doctest::Approx(solve_lp(nb.model).objective).epsilon(1e-9));
}

TEST_CASE("zero gap property on randomized instances") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = testgen::random_instance(rng, 5, 5);
    const auto& b = inst.network.battery;
    Lambda lam = best_worst_case_lambda(b.ec_max, b.ed_max, b.eta_c, b.eta_d);
    GapReport r = measure_zero_gap(inst.network, inst.demand, lam);
    REQUIRE(r.zero_gap_condition_met);
    CHECK(std::abs(r.abs_gap) <= 1e-6);
  }
}

TEST_CASE("report serialization") {
  GapReport g;
  g.z_mip = 1.5;
  g.z_lp = 1.5;
  g.zero_gap_condition_met = true;
  std::string js = gap_report_to_json(g);
  CHECK(js.find("\"z_mip\":1.5") != std::string::npos);
  CHECK(js.find("\"zero_gap_condition_met\":true") != std::string::npos);
  StructureReport s;
  CHECK(structure_report_to_json(s).find("max_pd_pex") != std::string::npos);
  std::vector<LambdaSweepRow> rows{{0.1, 2.0, 2.0, 0.0}};
  CHECK(lambda_sweep_to_csv(rows).rfind("lambda,z_mip,z_lp,gap\n0.1,2,2,0\n", 0) == 0);
}
