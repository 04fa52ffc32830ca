#include "gridess/matpower.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gridess {

namespace {

struct Matrix {
  std::vector<std::vector<double>> rows;
  std::vector<int> line_numbers;
};

// Scans for `mpc.<name> = [ ... ];` and parses the numeric rows.
// Rows are terminated by ';' or end of line.
bool extract_matrix(const std::string& text, const std::string& name,
                    Matrix& out) {
  const std::string key = "mpc." + name;
  std::size_t pos = 0;
  while (true) {
    pos = text.find(key, pos);
    if (pos == std::string::npos) return false;
    std::size_t after = pos + key.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
    if (after < text.size() && text[after] == '=') break;
    pos = after;
  }
  std::size_t open = text.find('[', pos);
  std::size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos)
    throw ParseError("matpower: unterminated matrix for " + key);
  int line_no = 1 + static_cast<int>(std::count(text.begin(), text.begin() + open, '\n'));

  std::string body = text.substr(open + 1, close - open - 1);
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    auto cmt = line.find('%');
    if (cmt != std::string::npos) line = line.substr(0, cmt);
    // Semicolons separate rows; treat each segment as one row.
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t semi = line.find(';', start);
      std::string seg = line.substr(start, semi == std::string::npos
                                               ? std::string::npos
                                               : semi - start);
      std::vector<double> row;
      std::istringstream fields(seg);
      std::string tok;
      bool bad = false;
      while (fields >> tok) {
        double v = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
          bad = true;
          break;
        }
        row.push_back(v);
      }
      if (bad)
        throw ParseError("matpower: malformed row in " + key + " near line " +
                         std::to_string(line_no));
      if (!row.empty()) {
        out.rows.push_back(std::move(row));
        out.line_numbers.push_back(line_no);
      }
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    ++line_no;
  }
  return true;
}

double scalar_field(const std::string& text, const std::string& name) {
  const std::string key = "mpc." + name;
  std::size_t pos = text.find(key);
  if (pos == std::string::npos)
    throw ParseError("matpower: missing " + key);
  std::size_t eq = text.find('=', pos);
  std::size_t semi = text.find(';', eq);
  if (eq == std::string::npos || semi == std::string::npos)
    throw ParseError("matpower: malformed " + key);
  std::string v = text.substr(eq + 1, semi - eq - 1);
  return std::stod(v);
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Network parse_matpower(const std::string& text, const MatpowerOptions& opt) {
  Network net;
  net.base_mva = scalar_field(text, "baseMVA");
  if (net.base_mva <= 0) throw DataError("matpower: baseMVA must be positive");

  Matrix bus, gen, branch, gencost;
  if (!extract_matrix(text, "bus", bus)) throw ParseError("matpower: missing mpc.bus");
  if (!extract_matrix(text, "gen", gen)) throw ParseError("matpower: missing mpc.gen");
  if (!extract_matrix(text, "branch", branch))
    throw ParseError("matpower: missing mpc.branch");
  bool has_cost = extract_matrix(text, "gencost", gencost);

  std::map<int, int> id_map;
  for (std::size_t i = 0; i < bus.rows.size(); ++i) {
    const auto& r = bus.rows[i];
    if (r.size() < 3)
      throw ParseError("matpower: bus row needs BUS_I, BUS_TYPE, PD (line " +
                       std::to_string(bus.line_numbers[i]) + ")");
    Bus b;
    b.external_id = static_cast<int>(r[0]);
    b.id = static_cast<int>(net.buses.size());
    b.nominal_demand = r[2] / net.base_mva;
    if (!id_map.emplace(b.external_id, b.id).second)
      throw DataError("matpower: duplicate bus id " +
                      std::to_string(b.external_id));
    net.buses.push_back(b);
  }
  auto bus_of = [&](double ext, int line_no) {
    auto it = id_map.find(static_cast<int>(ext));
    if (it == id_map.end())
      throw DataError("matpower: unknown bus id " +
                      std::to_string(static_cast<int>(ext)) + " (line " +
                      std::to_string(line_no) + ")");
    return it->second;
  };

  for (std::size_t i = 0; i < gen.rows.size(); ++i) {
    const auto& r = gen.rows[i];
    if (r.size() < 10)
      throw ParseError("matpower: gen row needs 10 columns up to PMIN (line " +
                       std::to_string(gen.line_numbers[i]) + ")");
    Generator g;
    g.bus = bus_of(r[0], gen.line_numbers[i]);
    g.g_max = r[8] / net.base_mva;
    g.g_min = r[9] / net.base_mva;
    if (opt.rescale_gen_min) g.g_min = std::max(g.g_min, g.g_max / 3.0);
    if (has_cost && i < gencost.rows.size()) {
      // MODEL=2 polynomial rows: cost coefficients high order first; take
      // the linear one, constant and higher orders are ignored.
      const auto& c = gencost.rows[i];
      if (c.size() >= 4 && static_cast<int>(c[0]) == 2) {
        int ncost = static_cast<int>(c[3]);
        if (ncost >= 2 && c.size() >= 4 + static_cast<std::size_t>(ncost)) {
          // Linear coefficient is second-to-last; per-MW cost becomes
          // per-unit cost through baseMVA.
          g.cost_coeff = c[4 + ncost - 2] * net.base_mva;
        }
      }
    }
    net.generators.push_back(g);
  }

  double max_demand = 1.0;
  for (const auto& b : net.buses) max_demand = std::max(max_demand, b.nominal_demand);
  for (std::size_t i = 0; i < branch.rows.size(); ++i) {
    const auto& r = branch.rows[i];
    if (r.size() < 6)
      throw ParseError("matpower: branch row needs 6 columns up to RATE_A (line " +
                       std::to_string(branch.line_numbers[i]) + ")");
    Line l;
    l.from = bus_of(r[0], branch.line_numbers[i]);
    l.to = bus_of(r[1], branch.line_numbers[i]);
    if (r[3] == 0.0)
      throw DataError("matpower: BR_X is zero on line " +
                      std::to_string(branch.line_numbers[i]));
    l.susceptance = 1.0 / r[3];
    double rate = r[5];
    l.capacity = rate == 0.0 ? opt.unlimited_cap_demand_multiple * max_demand
                             : rate / net.base_mva;
    net.lines.push_back(l);
  }

  net.validate();
  return net;
}

Network parse_matpower_file(const std::string& path,
                            const MatpowerOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open case file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  Network net = parse_matpower(ss.str(), options);
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.rfind('.');
  net.name = dot == std::string::npos ? base : base.substr(0, dot);
  return net;
}

std::string serialize_matpower(const Network& net) {
  std::ostringstream out;
  out << "function mpc = " << (net.name.empty() ? "case_export" : net.name)
      << "\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << fmt(net.base_mva) << ";\n";
  out << "mpc.bus = [\n";
  for (const auto& b : net.buses) {
    out << "\t" << b.external_id << "\t1\t" << fmt(b.nominal_demand * net.base_mva)
        << "\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;\n";
  }
  out << "];\n";
  out << "mpc.gen = [\n";
  for (const auto& g : net.generators) {
    out << "\t" << net.buses[g.bus].external_id << "\t0\t0\t0\t0\t1\t"
        << fmt(net.base_mva) << "\t1\t" << fmt(g.g_max * net.base_mva) << "\t"
        << fmt(g.g_min * net.base_mva) << ";\n";
  }
  out << "];\n";
  out << "mpc.branch = [\n";
  for (const auto& l : net.lines) {
    out << "\t" << net.buses[l.from].external_id << "\t"
        << net.buses[l.to].external_id << "\t0\t" << fmt(1.0 / l.susceptance)
        << "\t0\t" << fmt(l.capacity * net.base_mva) << ";\n";
  }
  out << "];\n";
  bool any_cost = false;
  for (const auto& g : net.generators) any_cost = any_cost || g.cost_coeff != 0.0;
  if (any_cost) {
    out << "mpc.gencost = [\n";
    for (const auto& g : net.generators)
      out << "\t2\t0\t0\t2\t" << fmt(g.cost_coeff / net.base_mva) << "\t0;\n";
    out << "];\n";
  }
  return out.str();
}

}  // namespace gridess
