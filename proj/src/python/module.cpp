#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridess/branch_bound.hpp"
#include "gridess/demand.hpp"
#include "gridess/lp_format.hpp"
#include "gridess/matpower.hpp"
#include "gridess/network.hpp"
#include "gridess/opf.hpp"
#include "gridess/regularization.hpp"
#include "gridess/simplex.hpp"
#include "gridess/trilevel.hpp"

namespace py = pybind11;
using namespace gridess;

PYBIND11_MODULE(_gridess, m) {
  m.doc() = "storage-aware DC dispatch toolkit";

  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<DataError>(m, "DataError");

  py::class_<Bus>(m, "Bus")
      .def(py::init<>())
      .def_readwrite("id", &Bus::id)
      .def_readwrite("external_id", &Bus::external_id)
      .def_readwrite("nominal_demand", &Bus::nominal_demand)
      .def_readwrite("has_battery", &Bus::has_battery);
  py::class_<Generator>(m, "Generator")
      .def(py::init<int, double, double, double>(), py::arg("bus"),
           py::arg("g_min"), py::arg("g_max"), py::arg("cost_coeff") = 0.0)
      .def_readwrite("bus", &Generator::bus)
      .def_readwrite("g_min", &Generator::g_min)
      .def_readwrite("g_max", &Generator::g_max)
      .def_readwrite("cost_coeff", &Generator::cost_coeff);
  py::class_<Line>(m, "Line")
      .def(py::init<int, int, double, double>(), py::arg("from_bus"),
           py::arg("to_bus"), py::arg("susceptance"), py::arg("capacity"))
      .def_readwrite("from_bus", &Line::from)
      .def_readwrite("to_bus", &Line::to)
      .def_readwrite("susceptance", &Line::susceptance)
      .def_readwrite("capacity", &Line::capacity);
  py::class_<BatteryConfig>(m, "BatteryConfig")
      .def(py::init<>())
      .def_readwrite("e_min", &BatteryConfig::e_min)
      .def_readwrite("e_max", &BatteryConfig::e_max)
      .def_readwrite("e0", &BatteryConfig::e0)
      .def_readwrite("eta_c", &BatteryConfig::eta_c)
      .def_readwrite("eta_d", &BatteryConfig::eta_d)
      .def_readwrite("ec_min", &BatteryConfig::ec_min)
      .def_readwrite("ec_max", &BatteryConfig::ec_max)
      .def_readwrite("ed_min", &BatteryConfig::ed_min)
      .def_readwrite("ed_max", &BatteryConfig::ed_max)
      .def("round_trip", &BatteryConfig::round_trip)
      .def("validate", &BatteryConfig::validate);
  py::class_<DemandScenario>(m, "DemandScenario")
      .def(py::init<>())
      .def_readwrite("horizon", &DemandScenario::horizon)
      .def_readwrite("values", &DemandScenario::values)
      .def("num_buses", &DemandScenario::num_buses);
  py::class_<Network>(m, "Network")
      .def(py::init<>())
      .def_readwrite("buses", &Network::buses)
      .def_readwrite("generators", &Network::generators)
      .def_readwrite("lines", &Network::lines)
      .def_readwrite("battery", &Network::battery)
      .def_readwrite("base_mva", &Network::base_mva)
      .def_readwrite("name", &Network::name)
      .def("num_buses", &Network::num_buses)
      .def("num_lines", &Network::num_lines)
      .def("battery_buses", &Network::battery_buses)
      .def("set_battery_buses", &Network::set_battery_buses)
      .def("place_batteries_at_largest_generators",
           &Network::place_batteries_at_largest_generators)
      .def("validate", &Network::validate);

  m.def("scale_battery", &scale_battery, py::arg("config"), py::arg("n_buses"));
  py::class_<MatpowerOptions>(m, "MatpowerOptions")
      .def(py::init<>())
      .def_readwrite("rescale_gen_min", &MatpowerOptions::rescale_gen_min)
      .def_readwrite("unlimited_cap_demand_multiple",
                     &MatpowerOptions::unlimited_cap_demand_multiple);
  m.def("parse_matpower", &parse_matpower, py::arg("text"),
        py::arg("options") = MatpowerOptions{});
  m.def("parse_matpower_file", &parse_matpower_file, py::arg("path"),
        py::arg("options") = MatpowerOptions{});
  m.def("serialize_matpower", &serialize_matpower);

  m.def("default_daily_profile", &default_daily_profile);
  m.def("load_profile", &load_profile);
  py::class_<DemandOptions>(m, "DemandOptions")
      .def(py::init<>())
      .def_readwrite("sigma_hat", &DemandOptions::sigma_hat)
      .def_readwrite("seed", &DemandOptions::seed)
      .def_readwrite("count", &DemandOptions::count)
      .def_readwrite("capacity_ratio", &DemandOptions::capacity_ratio);
  m.def("generate_demand", &generate_demand, py::arg("network"),
        py::arg("profile"), py::arg("options"));
  m.def("nominal_demand", &nominal_demand, py::arg("network"),
        py::arg("profile"), py::arg("capacity_ratio") = 0.8);
  m.def("scenario_to_csv", &scenario_to_csv);
  m.def("scenario_from_csv", &scenario_from_csv);

  py::enum_<RowSense>(m, "RowSense")
      .value("LE", RowSense::LessEqual)
      .value("EQ", RowSense::Equal)
      .value("GE", RowSense::GreaterEqual);
  py::enum_<ObjSense>(m, "ObjSense")
      .value("Minimize", ObjSense::Minimize)
      .value("Maximize", ObjSense::Maximize);
  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("Optimal", SolveStatus::Optimal)
      .value("Infeasible", SolveStatus::Infeasible)
      .value("Unbounded", SolveStatus::Unbounded)
      .value("IterationLimit", SolveStatus::IterationLimit)
      .value("TimeLimit", SolveStatus::TimeLimit);
  py::class_<LinearModel>(m, "LinearModel")
      .def(py::init<>())
      .def_readwrite("sense", &LinearModel::sense)
      .def_readwrite("obj_constant", &LinearModel::obj_constant)
      .def("add_var", &LinearModel::add_var, py::arg("lower"), py::arg("upper"),
           py::arg("obj_coeff"), py::arg("name") = std::string{})
      .def("add_row",
           [](LinearModel& self, RowSense sense, double rhs,
              const std::vector<std::pair<int, double>>& entries) {
             std::vector<RowEntry> row;
             for (auto& [v, c] : entries) row.push_back({v, c});
             return self.add_row(sense, rhs, std::move(row));
           })
      .def("set_binary", &LinearModel::set_binary)
      .def("set_bounds", &LinearModel::set_bounds)
      .def("num_vars", &LinearModel::num_vars)
      .def("num_rows", &LinearModel::num_rows)
      .def("var_name", &LinearModel::var_name)
      .def("lower", &LinearModel::lower)
      .def("upper", &LinearModel::upper)
      .def("obj_coeff", &LinearModel::obj_coeff)
      .def("binary_vars", &LinearModel::binary_vars)
      .def("max_violation", &LinearModel::max_violation)
      .def("objective_value", &LinearModel::objective_value);
  py::class_<Solution>(m, "Solution")
      .def_readonly("status", &Solution::status)
      .def_readonly("objective", &Solution::objective)
      .def_readonly("primal", &Solution::primal)
      .def_readonly("dual", &Solution::dual)
      .def_readonly("reduced_costs", &Solution::reduced_costs)
      .def_readonly("bound", &Solution::bound)
      .def_readonly("iterations", &Solution::iterations)
      .def_readonly("nodes", &Solution::nodes)
      .def("optimal", &Solution::optimal);
  m.def(
      "solve_lp",
      [](const LinearModel& model) { return solve_lp(model); },
      py::arg("model"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "solve_mip",
      [](const LinearModel& model, double gap_tol, double time_limit) {
        MipOptions opt;
        opt.gap_tol = gap_tol;
        opt.time_limit_sec = time_limit;
        return solve_mip(model, opt);
      },
      py::arg("model"), py::arg("gap_tol") = 1e-6,
      py::arg("time_limit") = 600.0, py::call_guard<py::gil_scoped_release>());
  m.def("dual_objective_value", &dual_objective_value);
  m.def("write_lp_format", &write_lp_format);
  m.def("read_lp_format", &read_lp_format);

  py::class_<Lambda>(m, "Lambda")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("charge"), py::arg("discharge"))
      .def_readwrite("charge", &Lambda::charge)
      .def_readwrite("discharge", &Lambda::discharge);
  py::enum_<OpfVariant>(m, "OpfVariant")
      .value("BatteryMIP", OpfVariant::BatteryMIP)
      .value("RegBatteryMIP", OpfVariant::RegBatteryMIP)
      .value("RegBatteryLP", OpfVariant::RegBatteryLP)
      .value("NoBattery", OpfVariant::NoBattery);
  py::class_<ModelVariant>(m, "ModelVariant")
      .def(py::init<>())
      .def(py::init([](OpfVariant tag, bool ohms) {
             return ModelVariant{tag, ohms};
           }),
           py::arg("tag"), py::arg("include_ohms_law") = true)
      .def_readwrite("tag", &ModelVariant::tag)
      .def_readwrite("include_ohms_law", &ModelVariant::include_ohms_law);
  py::class_<OpfIndex>(m, "OpfIndex")
      .def("theta", &OpfIndex::theta)
      .def("flow", &OpfIndex::flow)
      .def("pg", &OpfIndex::pg)
      .def("pc", &OpfIndex::pc)
      .def("pd", &OpfIndex::pd)
      .def("ps", &OpfIndex::ps)
      .def("pls", &OpfIndex::pls)
      .def("pex", &OpfIndex::pex)
      .def("u", &OpfIndex::u)
      .def_readonly("num_vars", &OpfIndex::num_vars);
  py::class_<OpfModel>(m, "OpfModel")
      .def_readonly("model", &OpfModel::model)
      .def_readonly("index", &OpfModel::index)
      .def_readonly("lambda_", &OpfModel::lambda);
  m.def("build_opf", &build_opf, py::arg("network"), py::arg("demand"),
        py::arg("lambda_"), py::arg("variant"));
  py::class_<DispatchSolution>(m, "DispatchSolution")
      .def_readonly("horizon", &DispatchSolution::horizon)
      .def_readonly("theta", &DispatchSolution::theta)
      .def_readonly("flow", &DispatchSolution::flow)
      .def_readonly("p_g", &DispatchSolution::p_g)
      .def_readonly("p_s", &DispatchSolution::p_s)
      .def_readonly("p_c", &DispatchSolution::p_c)
      .def_readonly("p_d", &DispatchSolution::p_d)
      .def_readonly("p_ls", &DispatchSolution::p_ls)
      .def_readonly("p_ex", &DispatchSolution::p_ex)
      .def_readonly("u", &DispatchSolution::u)
      .def_readonly("objective_c", &DispatchSolution::objective_c)
      .def_readonly("objective_reg", &DispatchSolution::objective_reg)
      .def("total_charge", &DispatchSolution::total_charge)
      .def("total_discharge", &DispatchSolution::total_discharge)
      .def("max_product_pc_pls", &DispatchSolution::max_product_pc_pls)
      .def("max_product_pd_pex", &DispatchSolution::max_product_pd_pex);
  m.def("extract_dispatch", &extract_dispatch);
  m.def("dispatch_to_csv", &dispatch_to_csv);
  m.def("dispatch_to_json", &dispatch_to_json);

  m.def("zero_gap_lambda_ok", &zero_gap_lambda_ok, py::arg("lambda_"),
        py::arg("eta_c"), py::arg("eta_d"));
  m.def("best_worst_case_lambda", &best_worst_case_lambda, py::arg("ec_max"),
        py::arg("ed_max"), py::arg("eta_c"), py::arg("eta_d"));
  m.def("worst_case_gap_bound", &worst_case_gap_bound, py::arg("horizon"),
        py::arg("n_batteries"), py::arg("ec_max"), py::arg("ed_max"),
        py::arg("lambda_"));
  m.def("integralize", &integralize, py::arg("dispatch"), py::arg("network"),
        py::arg("lambda_"));
  py::class_<GapReport>(m, "GapReport")
      .def_readonly("z_mip", &GapReport::z_mip)
      .def_readonly("z_lp", &GapReport::z_lp)
      .def_readonly("abs_gap", &GapReport::abs_gap)
      .def_readonly("rel_gap", &GapReport::rel_gap)
      .def_readonly("zero_gap_condition_met", &GapReport::zero_gap_condition_met);
  m.def("measure_zero_gap", &measure_zero_gap, py::arg("network"),
        py::arg("demand"), py::arg("lambda_"),
        py::arg("include_ohms_law") = false,
        py::call_guard<py::gil_scoped_release>());
  py::class_<StructureReport>(m, "StructureReport")
      .def_readonly("max_pc_pls", &StructureReport::max_pc_pls)
      .def_readonly("max_pd_pex", &StructureReport::max_pd_pex)
      .def_readonly("condition_strict", &StructureReport::condition_strict)
      .def_readonly("ok_pc_pls", &StructureReport::ok_pc_pls)
      .def_readonly("ok_pd_pex", &StructureReport::ok_pd_pex);
  m.def("check_structure", &check_structure, py::arg("dispatch"),
        py::arg("lambda_"), py::arg("eta_c"), py::arg("eta_d"),
        py::arg("tol") = 1e-9);
  py::class_<ExactnessReport>(m, "ExactnessReport")
      .def_readonly("z_ori", &ExactnessReport::z_ori)
      .def_readonly("delta", &ExactnessReport::delta)
      .def_readonly("min_lambda_g", &ExactnessReport::min_lambda_g)
      .def_readonly("exact", &ExactnessReport::exact)
      .def_readonly("optimal_patterns", &ExactnessReport::optimal_patterns)
      .def_readonly("reg_u_recovered", &ExactnessReport::reg_u_recovered);
  m.def("check_exactness_bruteforce", &check_exactness_bruteforce,
        py::arg("network"), py::arg("demand"), py::arg("lambda_"),
        py::call_guard<py::gil_scoped_release>());
  m.def("no_battery_equivalence", &no_battery_equivalence, py::arg("network"),
        py::arg("demand"), py::call_guard<py::gil_scoped_release>());
  m.def("gap_report_to_json", &gap_report_to_json);
  m.def("structure_report_to_json", &structure_report_to_json);

  py::class_<Placement>(m, "Placement")
      .def(py::init<>())
      .def(py::init([](const std::vector<int>& flags, int budget) {
             Placement p;
             p.budget = budget;
             for (int v : flags) p.x.push_back(static_cast<char>(v != 0));
             return p;
           }),
           py::arg("x"), py::arg("budget"))
      .def_property_readonly(
          "x",
          [](const Placement& p) {
            return std::vector<int>(p.x.begin(), p.x.end());
          })
      .def_readwrite("budget", &Placement::budget)
      .def("count", &Placement::count);
  py::class_<Attack>(m, "Attack")
      .def(py::init<>())
      .def(py::init([](const std::vector<int>& flags, int budget) {
             Attack a;
             a.budget = budget;
             for (int v : flags) a.y.push_back(static_cast<char>(v != 0));
             return a;
           }),
           py::arg("y"), py::arg("budget"))
      .def_property_readonly(
          "y",
          [](const Attack& a) { return std::vector<int>(a.y.begin(), a.y.end()); })
      .def_readwrite("budget", &Attack::budget)
      .def("count", &Attack::count);
  py::enum_<ThirdLevelVariant>(m, "ThirdLevelVariant")
      .value("Reg", ThirdLevelVariant::Reg)
      .value("ExactMIP", ThirdLevelVariant::ExactMIP)
      .value("LPRelax", ThirdLevelVariant::LPRelax);
  m.def("build_third_level", &build_third_level, py::arg("network"),
        py::arg("demand"), py::arg("x"), py::arg("y"), py::arg("lambda_"),
        py::arg("variant"));
  m.def(
      "worst_attack",
      [](const Network& net, const DemandScenario& dem, const Placement& x,
         int k, const Lambda& lam, ThirdLevelVariant variant) {
        return worst_attack(net, dem, x, k, lam, variant);
      },
      py::arg("network"), py::arg("demand"), py::arg("x"), py::arg("k"),
      py::arg("lambda_"), py::arg("variant") = ThirdLevelVariant::Reg,
      py::call_guard<py::gil_scoped_release>());
  py::class_<TrilevelStop>(m, "TrilevelStop")
      .def(py::init<>())
      .def_readwrite("gap", &TrilevelStop::gap)
      .def_readwrite("max_iterations", &TrilevelStop::max_iterations)
      .def_readwrite("time_limit_sec", &TrilevelStop::time_limit_sec);
  py::enum_<TrilevelStatus>(m, "TrilevelStatus")
      .value("Converged", TrilevelStatus::Converged)
      .value("Stalled", TrilevelStatus::Stalled)
      .value("IterationLimit", TrilevelStatus::IterationLimit)
      .value("TimeLimit", TrilevelStatus::TimeLimit);
  py::class_<TrilevelRun>(m, "TrilevelRun")
      .def_readonly("upper", &TrilevelRun::upper)
      .def_readonly("lower", &TrilevelRun::lower)
      .def_readonly("ub_history", &TrilevelRun::ub_history)
      .def_readonly("lb_history", &TrilevelRun::lb_history)
      .def_readonly("best_x", &TrilevelRun::best_x)
      .def_readonly("worst_y", &TrilevelRun::worst_y)
      .def_readonly("iterations", &TrilevelRun::iterations)
      .def_readonly("status", &TrilevelRun::status);
  py::class_<TrilevelResult>(m, "TrilevelResult")
      .def_readonly("reg", &TrilevelResult::reg)
      .def_readonly("lp", &TrilevelResult::lp)
      .def_readonly("solution_gap", &TrilevelResult::solution_gap)
      .def_readonly("trilevel_gap_reg", &TrilevelResult::trilevel_gap_reg)
      .def_readonly("trilevel_gap_lp", &TrilevelResult::trilevel_gap_lp)
      .def_readonly("wall_time_sec", &TrilevelResult::wall_time_sec);
  m.def("solve_trilevel", &solve_trilevel, py::arg("network"),
        py::arg("demand"), py::arg("b"), py::arg("k"), py::arg("lambda_"),
        py::arg("stop") = TrilevelStop{},
        py::call_guard<py::gil_scoped_release>());
  m.def("brute_force_trilevel", &brute_force_trilevel, py::arg("network"),
        py::arg("demand"), py::arg("b"), py::arg("k"),
        py::call_guard<py::gil_scoped_release>());
  m.def("trilevel_result_to_json", &trilevel_result_to_json);
  m.def("trilevel_csv_header", &trilevel_csv_header);
  m.def("trilevel_result_to_csv_row", &trilevel_result_to_csv_row);
}
