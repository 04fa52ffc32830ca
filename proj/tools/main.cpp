// gridess command line: builds and solves storage-aware dispatch models,
// penalty sweeps, and placement-under-attack studies from MATPOWER cases.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "gridess/branch_bound.hpp"
#include "gridess/demand.hpp"
#include "gridess/lp_format.hpp"
#include "gridess/matpower.hpp"
#include "gridess/regularization.hpp"
#include "gridess/simplex.hpp"
#include "gridess/trilevel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gridess;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct RunConfig {
  std::string case_path;
  int horizon = 24;
  double sigma_hat = 0.0;
  std::uint64_t seed = 1;
  int scenario_count = 1;
  std::string lambda_mode = "prop3";  // prop3 | zero | explicit
  double lambda_c = 0.0;
  double lambda_d = 0.0;
  std::string battery_mode = "top";  // top | explicit
  int battery_count = 2;
  std::vector<int> battery_ids;
  int b = 2;
  int k = 3;
  TrilevelStop stop;
  std::string profile_path;
  std::string demand_csv;
  bool include_ohms_law = true;
  bool rescale_gen_min = false;
  bool scale_battery_by_size = true;
  double eta = 0.0;  // 0: keep the reference efficiency
  json battery_overrides;
  std::string output_dir;
  int jobs = 1;
};

void apply_json(RunConfig& c, const json& j) {
  if (j.contains("case")) c.case_path = j["case"].get<std::string>();
  if (j.contains("horizon")) c.horizon = j["horizon"].get<int>();
  if (j.contains("sigma_hat")) c.sigma_hat = j["sigma_hat"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("scenarios")) c.scenario_count = j["scenarios"].get<int>();
  if (j.contains("lambda")) {
    const auto& l = j["lambda"];
    c.lambda_mode = l.value("mode", c.lambda_mode);
    c.lambda_c = l.value("charge", c.lambda_c);
    c.lambda_d = l.value("discharge", c.lambda_d);
  }
  if (j.contains("battery_buses")) {
    const auto& b = j["battery_buses"];
    c.battery_mode = b.value("mode", c.battery_mode);
    if (b.contains("count")) c.battery_count = b["count"].get<int>();
    if (b.contains("ids")) c.battery_ids = b["ids"].get<std::vector<int>>();
  }
  if (j.contains("battery")) c.battery_overrides = j["battery"];
  if (j.contains("scale_battery"))
    c.scale_battery_by_size = j["scale_battery"].get<bool>();
  if (j.contains("rescale_gen_min"))
    c.rescale_gen_min = j["rescale_gen_min"].get<bool>();
  if (j.contains("eta")) c.eta = j["eta"].get<double>();
  if (j.contains("b")) c.b = j["b"].get<int>();
  if (j.contains("k")) c.k = j["k"].get<int>();
  if (j.contains("stop")) {
    const auto& s = j["stop"];
    c.stop.gap = s.value("gap", c.stop.gap);
    c.stop.max_iterations = s.value("max_iterations", c.stop.max_iterations);
    c.stop.time_limit_sec = s.value("time_limit_sec", c.stop.time_limit_sec);
  }
  if (j.contains("profile")) c.profile_path = j["profile"].get<std::string>();
  if (j.contains("demand_csv")) c.demand_csv = j["demand_csv"].get<std::string>();
  if (j.contains("include_ohms_law"))
    c.include_ohms_law = j["include_ohms_law"].get<bool>();
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
}

struct Prepared {
  Network network;
  std::vector<DemandScenario> scenarios;
  Lambda lambda;
};

void apply_battery_overrides(BatteryConfig& bat, const json& j) {
  if (j.is_null()) return;
  bat.e_min = j.value("e_min", bat.e_min);
  bat.e_max = j.value("e_max", bat.e_max);
  bat.e0 = j.value("e0", bat.e0);
  bat.eta_c = j.value("eta_c", bat.eta_c);
  bat.eta_d = j.value("eta_d", bat.eta_d);
  bat.ec_min = j.value("ec_min", bat.ec_min);
  bat.ec_max = j.value("ec_max", bat.ec_max);
  bat.ed_min = j.value("ed_min", bat.ed_min);
  bat.ed_max = j.value("ed_max", bat.ed_max);
}

Prepared prepare(const RunConfig& c) {
  if (c.case_path.empty())
    throw CLI::ValidationError("--case", "a case file is required");
  MatpowerOptions mopt;
  mopt.rescale_gen_min = c.rescale_gen_min;
  Prepared p;
  p.network = parse_matpower_file(c.case_path, mopt);

  // Reference battery parameters for a medium-size network, rescaled by
  // network size unless disabled, then any explicit overrides.
  BatteryConfig bat;
  bat.e_min = 0.0;
  bat.e_max = 1.0;
  bat.eta_c = bat.eta_d = 0.95;
  bat.ec_min = bat.ed_min = 0.0;
  bat.ec_max = bat.ed_max = 0.95;
  bat.e0 = 0.0;
  if (c.scale_battery_by_size) bat = scale_battery(bat, p.network.num_buses());
  if (c.eta > 0.0) bat.eta_c = bat.eta_d = c.eta;
  apply_battery_overrides(bat, c.battery_overrides);
  bat.validate();
  p.network.battery = bat;

  if (c.battery_mode == "explicit")
    p.network.set_battery_buses(c.battery_ids);
  else
    p.network.place_batteries_at_largest_generators(c.battery_count);

  if (!c.demand_csv.empty()) {
    p.scenarios.push_back(scenario_from_csv_file(c.demand_csv));
    if (p.scenarios[0].num_buses() != p.network.num_buses())
      throw DataError("demand csv bus count does not match the case");
  } else {
    std::vector<double> profile = c.profile_path.empty()
                                      ? default_daily_profile()
                                      : load_profile(c.profile_path);
    profile.resize(std::min<std::size_t>(profile.size(), c.horizon));
    if (static_cast<int>(profile.size()) < c.horizon)
      throw DataError("profile shorter than the requested horizon");
    DemandOptions dopt;
    dopt.sigma_hat = c.sigma_hat;
    dopt.seed = c.seed;
    dopt.count = c.scenario_count;
    p.scenarios = generate_demand(p.network, profile, dopt);
  }

  const auto& bt = p.network.battery;
  if (c.lambda_mode == "zero")
    p.lambda = {0.0, 0.0};
  else if (c.lambda_mode == "explicit")
    p.lambda = {c.lambda_c, c.lambda_d};
  else if (c.lambda_mode == "prop3")
    p.lambda = best_worst_case_lambda(bt.ec_max, bt.ed_max, bt.eta_c, bt.eta_d);
  else
    throw CLI::ValidationError("--lambda-mode",
                               "expected prop3, zero or explicit");
  return p;
}

fs::path ensure_outdir(const RunConfig& c) {
  std::string dir = c.output_dir;
  if (dir.empty()) {
    const char* env = std::getenv("GRIDESS_OUT");
    dir = env && *env ? env : ".";
  }
  fs::path out(dir);
  fs::create_directories(out);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

std::string solution_json(const Solution& s, const LinearModel& model) {
  json j;
  j["status"] = to_string(s.status);
  j["objective"] = s.objective;
  j["bound"] = s.bound;
  j["primal"] = s.primal;
  json names = json::array();
  for (int v = 0; v < model.num_vars(); ++v) names.push_back(model.var_name(v));
  j["names"] = names;
  return j.dump();
}

// Scenario-level fan-out: runs fn(j) for j in [0, count) on `jobs` threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::mutex err_mutex;
  std::exception_ptr first_error;
  for (int w = 0; w < std::min(jobs, count); ++w) {
    pool.emplace_back([&] {
      while (true) {
        int i = next.fetch_add(1);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int cmd_opf(const RunConfig& c) {
  Prepared p = prepare(c);
  fs::path out = ensure_outdir(c);
  const int n = static_cast<int>(p.scenarios.size());
  struct Row {
    double z_ori, z_reg_mip, z_reg_lp, c_hat, opt_gap, lp_gap;
  };
  std::vector<Row> rows(n);
  json manifest;
  manifest["command"] = "opf";
  manifest["entries"] = json::array();
  std::mutex manifest_mutex;

  parallel_for(n, c.jobs, [&](int j) {
    const DemandScenario& dem = p.scenarios[j];
    auto run = [&](OpfVariant tag, const char* name) {
      OpfModel m = build_opf(p.network, dem, p.lambda,
                             {tag, c.include_ohms_law});
      Solution s = (tag == OpfVariant::BatteryMIP ||
                    tag == OpfVariant::RegBatteryMIP)
                       ? solve_mip(m.model)
                       : solve_lp(m.model);
      if (!s.optimal())
        throw std::runtime_error(std::string("scenario ") + std::to_string(j) +
                                 " " + name + ": " + to_string(s.status));
      DispatchSolution d = extract_dispatch(m, s);
      std::string stem =
          std::string(name) + "_s" + std::to_string(j);
      write_file(out / (stem + ".csv"), dispatch_to_csv(d));
      write_file(out / (stem + ".json"), dispatch_to_json(d));
      write_file(out / (stem + ".lp"), write_lp_format(m.model));
      write_file(out / (stem + ".sol.json"), solution_json(s, m.model));
      {
        std::lock_guard<std::mutex> lock(manifest_mutex);
        manifest["entries"].push_back(
            {{"model", stem + ".lp"}, {"solution", stem + ".sol.json"}});
      }
      return d;
    };
    DispatchSolution ori = run(OpfVariant::BatteryMIP, "battery");
    DispatchSolution reg = run(OpfVariant::RegBatteryMIP, "reg_mip");
    DispatchSolution lp = run(OpfVariant::RegBatteryLP, "reg_lp");
    Row r;
    r.z_ori = ori.objective_c;
    r.z_reg_mip = reg.objective_reg;
    r.z_reg_lp = lp.objective_reg;
    r.c_hat = reg.objective_c;
    r.opt_gap = std::abs(r.z_ori) > 1e-12
                    ? (r.c_hat - r.z_ori) / std::abs(r.z_ori)
                    : 0.0;
    r.lp_gap = std::abs(r.z_reg_mip - r.z_reg_lp);
    rows[j] = r;
  });

  std::string csv =
      "scenario,z_ori,z_reg_mip,z_reg_lp,c_hat,opt_gap,reg_lp_abs_gap\n";
  double mean_gap = 0.0;
  for (int j = 0; j < n; ++j) {
    const Row& r = rows[j];
    csv += std::to_string(j) + "," + fmt(r.z_ori) + "," + fmt(r.z_reg_mip) +
           "," + fmt(r.z_reg_lp) + "," + fmt(r.c_hat) + "," + fmt(r.opt_gap) +
           "," + fmt(r.lp_gap) + "\n";
    mean_gap += r.opt_gap;
  }
  mean_gap /= std::max(1, n);
  write_file(out / "summary.csv", csv);
  // Entries are appended in thread order; sort for reproducible manifests.
  auto& entries = manifest["entries"];
  std::sort(entries.begin(), entries.end(), [](const json& a, const json& b) {
    return a["model"].get<std::string>() < b["model"].get<std::string>();
  });
  manifest["lambda"] = {{"charge", p.lambda.charge},
                        {"discharge", p.lambda.discharge}};
  write_file(out / "manifest.json", manifest.dump(2));
  std::cout << "scenarios: " << n << "\nmean optimality gap: " << fmt(mean_gap)
            << "\nwrote " << (out / "summary.csv").string() << "\n";
  return kExitOk;
}

int cmd_lambda_sweep(const RunConfig& c, std::vector<double> grid) {
  Prepared p = prepare(c);
  fs::path out = ensure_outdir(c);
  if (p.scenarios.empty()) throw DataError("no demand scenario");
  const DemandScenario& dem = p.scenarios[0];
  const auto& bt = p.network.battery;
  Lambda prop3 =
      best_worst_case_lambda(bt.ec_max, bt.ed_max, bt.eta_c, bt.eta_d);
  if (grid.empty()) {
    for (int i = 0; i <= 20; ++i) grid.push_back(0.05 * i);
  }
  grid.push_back(prop3.charge);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());

  OpfModel exact = build_opf(p.network, dem, {}, {OpfVariant::BatteryMIP, c.include_ohms_law});
  Solution se = solve_mip(exact.model);
  if (!se.optimal()) throw std::runtime_error("exact model solve failed");
  double c_star = extract_dispatch(exact, se).objective_c;
  const int nb = static_cast<int>(p.network.battery_buses().size());

  std::string csv = "lambda,c_of_p,reg_objective,theoretical_bound,empirical_gap\n";
  std::vector<LambdaSweepRow> gap_rows;
  for (double lam : grid) {
    Lambda l{lam, lam};
    OpfModel reg = build_opf(p.network, dem, l, {OpfVariant::RegBatteryMIP, c.include_ohms_law});
    Solution s = solve_mip(reg.model);
    if (!s.optimal()) throw std::runtime_error("sweep solve failed");
    DispatchSolution d = extract_dispatch(reg, s);
    double bound = worst_case_gap_bound(dem.horizon, std::max(nb, 1),
                                        bt.ec_max, bt.ed_max, l);
    csv += fmt(lam) + "," + fmt(d.objective_c) + "," + fmt(d.objective_reg) +
           "," + fmt(bound) + "," + fmt(d.objective_c - c_star) + "\n";
    OpfModel relax = build_opf(p.network, dem, l,
                               {OpfVariant::RegBatteryLP, c.include_ohms_law});
    Solution sl = solve_lp(relax.model);
    if (!sl.optimal()) throw std::runtime_error("sweep relaxation failed");
    gap_rows.push_back(
        {lam, d.objective_reg, sl.objective, d.objective_reg - sl.objective});
  }
  write_file(out / "lambda_sweep.csv", csv);
  write_file(out / "lambda_gap_sweep.csv", lambda_sweep_to_csv(gap_rows));
  json meta;
  meta["prop3_lambda"] = {{"charge", prop3.charge}, {"discharge", prop3.discharge}};
  meta["c_star"] = c_star;
  write_file(out / "lambda_sweep_meta.json", meta.dump(2));
  std::cout << "wrote " << (out / "lambda_sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_trilevel(const RunConfig& c) {
  Prepared p = prepare(c);
  fs::path out = ensure_outdir(c);
  if (p.scenarios.empty()) throw DataError("no demand scenario");
  const DemandScenario& dem = p.scenarios[0];
  TrilevelResult r = solve_trilevel(p.network, dem, c.b, c.k, p.lambda, c.stop);
  write_file(out / "trilevel.json", trilevel_result_to_json(r));
  write_file(out / "trilevel.csv",
             trilevel_csv_header() + trilevel_result_to_csv_row(r));
  std::cout << "z_reg in [" << fmt(r.reg.lower) << ", " << fmt(r.reg.upper)
            << "], z_lp lower " << fmt(r.lp.lower)
            << ", solution gap " << fmt(r.solution_gap) << "\n";
  // At enumeration scale, also certify against the exact reference.
  double nsub = 1.0, lsub = 1.0, cc = 1.0;
  for (int j = 1; j <= c.b; ++j) {
    cc = cc * (p.network.num_buses() - j + 1) / j;
    nsub += cc;
  }
  cc = 1.0;
  for (int j = 1; j <= c.k; ++j) {
    cc = cc * (p.network.num_lines() - j + 1) / j;
    lsub += cc;
  }
  if (nsub * lsub <= 2000.0) {
    double exact = brute_force_trilevel(p.network, dem, c.b, c.k);
    bool ok = r.lp.lower <= exact + 1e-6 && exact <= r.reg.upper + 1e-6;
    std::cout << "enumeration reference: " << fmt(exact)
              << (ok ? " (within bounds)" : " (BOUND VIOLATION)") << "\n";
    if (!ok) return kExitSolver;
  }
  return kExitOk;
}

int cmd_gen_demand(const RunConfig& c) {
  Prepared p = prepare(c);
  fs::path out = ensure_outdir(c);
  for (std::size_t j = 0; j < p.scenarios.size(); ++j)
    write_file(out / ("scenario_s" + std::to_string(j) + ".csv"),
               scenario_to_csv(p.scenarios[j]));
  std::cout << "wrote " << p.scenarios.size() << " scenario files to "
            << out.string() << "\n";
  return kExitOk;
}

int cmd_export_lp(const RunConfig& c, const std::string& variant_name,
                  const std::string& out_file) {
  Prepared p = prepare(c);
  if (p.scenarios.empty()) throw DataError("no demand scenario");
  OpfVariant tag;
  if (variant_name == "battery")
    tag = OpfVariant::BatteryMIP;
  else if (variant_name == "reg-mip")
    tag = OpfVariant::RegBatteryMIP;
  else if (variant_name == "reg-lp")
    tag = OpfVariant::RegBatteryLP;
  else if (variant_name == "no-battery")
    tag = OpfVariant::NoBattery;
  else
    throw CLI::ValidationError("--variant",
                               "expected battery, reg-mip, reg-lp or no-battery");
  OpfModel m = build_opf(p.network, p.scenarios[0], p.lambda,
                         {tag, c.include_ohms_law});
  std::string text = write_lp_format(m.model);
  if (out_file.empty() || out_file == "-") {
    std::cout << text;
  } else {
    write_file(out_file, text);
    std::cout << "wrote " << out_file << "\n";
  }
  return kExitOk;
}

int cmd_check(const std::string& dir) {
  fs::path root(dir);
  std::ifstream mf(root / "manifest.json");
  if (!mf) throw DataError("no manifest.json in " + dir);
  json manifest = json::parse(mf);
  int checked = 0, failed = 0;
  for (const auto& entry : manifest["entries"]) {
    std::ifstream lpf(root / entry["model"].get<std::string>());
    std::ifstream sol(root / entry["solution"].get<std::string>());
    if (!lpf || !sol) throw DataError("missing artifact for " + entry.dump());
    std::ostringstream lptext;
    lptext << lpf.rdbuf();
    LinearModel model = read_lp_format(lptext.str());
    json s = json::parse(sol);
    std::vector<double> stored = s["primal"].get<std::vector<double>>();
    std::vector<std::string> names = s["names"].get<std::vector<std::string>>();
    double objective = s["objective"].get<double>();
    ++checked;
    std::string name = entry["model"].get<std::string>();
    // The reader indexes variables by first appearance; align by name.
    std::map<std::string, double> by_name;
    for (std::size_t i = 0; i < stored.size() && i < names.size(); ++i)
      by_name[names[i]] = stored[i];
    std::vector<double> primal(model.num_vars(), 0.0);
    bool missing = false;
    for (int v = 0; v < model.num_vars(); ++v) {
      auto it = by_name.find(model.var_name(v));
      if (it == by_name.end()) {
        missing = true;
        break;
      }
      primal[v] = it->second;
    }
    if (missing || static_cast<int>(stored.size()) != model.num_vars()) {
      std::cout << "FAIL " << name << ": stored solution does not match model\n";
      ++failed;
      continue;
    }
    double viol = model.max_violation(primal);
    double obj_err = std::abs(model.objective_value(primal) - objective);
    double int_err = 0.0;
    for (int v : model.binary_vars()) {
      double f = primal[v] - std::floor(primal[v]);
      int_err = std::max(int_err, std::min(f, 1.0 - f));
    }
    if (viol > 1e-6 || obj_err > 1e-6 || int_err > 1e-6) {
      std::cout << "FAIL " << name << ": violation " << fmt(viol)
                << ", objective error " << fmt(obj_err) << ", integrality "
                << fmt(int_err) << "\n";
      ++failed;
    }
  }
  std::cout << (failed == 0 ? "OK" : "FAILED") << ": " << checked
            << " stored solutions checked, " << failed << " failures\n";
  return failed == 0 ? kExitOk : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"storage-aware DC dispatch toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::vector<double> sweep_grid;
  std::string variant_name = "reg-mip";
  std::string export_out;
  std::string check_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--case", cfg.case_path, "MATPOWER case file");
    sub->add_option("-T,--horizon", cfg.horizon, "number of hourly periods");
    sub->add_option("--sigma", cfg.sigma_hat, "demand noise fraction");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("-n,--scenarios", cfg.scenario_count, "scenario count");
    sub->add_option("--lambda-mode", cfg.lambda_mode, "prop3 | zero | explicit");
    sub->add_option("--lambda-c", cfg.lambda_c, "explicit charge penalty");
    sub->add_option("--lambda-d", cfg.lambda_d, "explicit discharge penalty");
    sub->add_option("--battery-buses", cfg.battery_ids,
                    "explicit battery bus indices (0-based)");
    sub->add_option("--battery-count", cfg.battery_count,
                    "place at the largest-generation buses");
    sub->add_option("--eta", cfg.eta, "override both efficiencies");
    sub->add_flag("--ohms,!--no-ohms", cfg.include_ohms_law,
                  "angle constraints (on by default)");
    sub->add_flag("--rescale-gen-min", cfg.rescale_gen_min,
                  "raise generator minima to max/3");
    sub->add_option("--profile", cfg.profile_path, "demand profile file");
    sub->add_option("--demand-csv", cfg.demand_csv, "explicit demand scenario");
    sub->add_option("-o,--out", cfg.output_dir,
                    "output directory (default $GRIDESS_OUT or .)");
    sub->add_option("-j,--jobs", cfg.jobs, "parallel scenario solves");
  };

  CLI::App* opf = app.add_subcommand("opf", "solve the dispatch models per scenario");
  add_common(opf);
  CLI::App* sweep = app.add_subcommand("lambda-sweep", "objective vs penalty table");
  add_common(sweep);
  sweep->add_option("--grid", sweep_grid, "penalty values (both components)");
  CLI::App* tri = app.add_subcommand("trilevel", "placement under line attacks");
  add_common(tri);
  tri->add_option("-b,--batteries", cfg.b, "placement budget");
  tri->add_option("-k,--attacks", cfg.k, "attack budget");
  tri->add_option("--gap", cfg.stop.gap, "relative stop gap");
  tri->add_option("--max-iter", cfg.stop.max_iterations, "iteration cap");
  tri->add_option("--time-limit", cfg.stop.time_limit_sec, "seconds");
  CLI::App* gen = app.add_subcommand("gen-demand", "write demand scenario CSVs");
  add_common(gen);
  CLI::App* exp = app.add_subcommand("export-lp", "emit one model as LP text");
  add_common(exp);
  exp->add_option("--variant", variant_name, "battery | reg-mip | reg-lp | no-battery");
  exp->add_option("--lp-out", export_out, "output file (default stdout)");
  CLI::App* chk = app.add_subcommand("check", "re-verify stored solutions");
  chk->add_option("dir", check_dir, "output directory with manifest.json")
      ->required();

  // The config file seeds the defaults; parsed flags then overwrite them,
  // so a flag always wins over the file.
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc)
      config_path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0)
      config_path = a.substr(9);
  }
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "data error: cannot open config: " << config_path << "\n";
      return kExitData;
    }
    try {
      apply_json(cfg, json::parse(f));
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    // Relative paths in the file resolve against the file's directory.
    fs::path base = fs::path(config_path).parent_path();
    auto rebase = [&](std::string& p) {
      if (p.empty() || fs::path(p).is_absolute() || fs::exists(p)) return;
      fs::path cand = base / p;
      if (fs::exists(cand)) p = cand.string();
    };
    rebase(cfg.case_path);
    rebase(cfg.profile_path);
    rebase(cfg.demand_csv);
  }

  CLI11_PARSE(app, argc, argv);

  // Passing explicit values selects the matching mode.
  for (CLI::App* sub : app.get_subcommands()) {
    auto passed = [&](const char* name) {
      const CLI::Option* o = sub->get_option_no_throw(name);
      return o && o->count() > 0;
    };
    if (passed("--battery-buses")) cfg.battery_mode = "explicit";
    if (cfg.lambda_mode != "explicit" &&
        (passed("--lambda-c") || passed("--lambda-d")))
      cfg.lambda_mode = "explicit";
  }

  try {
    if (opf->parsed()) return cmd_opf(cfg);
    if (sweep->parsed()) return cmd_lambda_sweep(cfg, sweep_grid);
    if (tri->parsed()) return cmd_trilevel(cfg);
    if (gen->parsed()) return cmd_gen_demand(cfg);
    if (exp->parsed()) return cmd_export_lp(cfg, variant_name, export_out);
    if (chk->parsed()) return cmd_check(check_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
