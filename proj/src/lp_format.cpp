#include "gridess/lp_format.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace gridess {

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void append_terms(std::string& out, const std::vector<RowEntry>& entries,
                  const LinearModel& model) {
  bool first = true;
  for (const auto& e : entries) {
    if (e.coeff == 0.0) continue;
    double c = e.coeff;
    if (first) {
      if (c < 0) {
        out += "- ";
        c = -c;
      }
      first = false;
    } else {
      out += c < 0 ? " - " : " + ";
      c = std::abs(c);
    }
    if (c != 1.0) {
      out += num(c);
      out += ' ';
    }
    out += model.var_name(e.var);
  }
}

}  // namespace

std::string write_lp_format(const LinearModel& model) {
  std::string out;
  out += model.sense == ObjSense::Maximize ? "Maximize\n" : "Minimize\n";
  out += " obj:";
  std::vector<RowEntry> obj;
  for (int v = 0; v < model.num_vars(); ++v)
    if (model.obj_coeff(v) != 0.0) obj.push_back({v, model.obj_coeff(v)});
  if (!obj.empty()) {
    out += ' ';
    append_terms(out, obj, model);
  }
  if (model.obj_constant != 0.0) {
    out += model.obj_constant < 0 ? " - " : " + ";
    out += num(std::abs(model.obj_constant));
  }
  out += "\nSubject To\n";
  for (int r = 0; r < model.num_rows(); ++r) {
    out += " c" + std::to_string(r) + ": ";
    bool all_zero = true;
    for (const auto& e : model.row(r)) all_zero = all_zero && e.coeff == 0.0;
    if (all_zero)
      out += "0";
    else
      append_terms(out, model.row(r), model);
    switch (model.row_sense(r)) {
      case RowSense::LessEqual: out += " <= "; break;
      case RowSense::Equal: out += " = "; break;
      case RowSense::GreaterEqual: out += " >= "; break;
    }
    out += num(model.rhs(r));
    out += '\n';
  }
  out += "Bounds\n";
  for (int v = 0; v < model.num_vars(); ++v) {
    double lo = model.lower(v), up = model.upper(v);
    const std::string name = model.var_name(v);
    if (lo <= -kInfinity && up >= kInfinity) {
      out += " " + name + " free\n";
    } else if (lo == up) {
      out += " " + name + " = " + num(lo) + "\n";
    } else if (lo <= -kInfinity) {
      out += " -inf <= " + name + " <= " + num(up) + "\n";
    } else if (up >= kInfinity) {
      out += " " + name + " >= " + num(lo) + "\n";
    } else {
      out += " " + num(lo) + " <= " + name + " <= " + num(up) + "\n";
    }
  }
  auto bins = model.binary_vars();
  if (!bins.empty()) {
    out += "Binary\n";
    for (int v : bins) out += " " + model.var_name(v) + "\n";
  }
  out += "End\n";
  return out;
}

namespace {

struct Tok {
  std::vector<std::string> items;
};

bool is_number_start(const std::string& t) {
  return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) ||
                        t[0] == '.' || t == "-inf" || t == "+inf" ||
                        ((t[0] == '-' || t[0] == '+') && t.size() > 1 &&
                         (std::isdigit(static_cast<unsigned char>(t[1])) ||
                          t[1] == '.')));
}

double parse_number(const std::string& t, int line_no) {
  if (t == "-inf") return -kInfinity;
  if (t == "+inf" || t == "inf") return kInfinity;
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw std::runtime_error("lp parse: bad number '" + t + "' on line " +
                             std::to_string(line_no));
  return v;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

LinearModel read_lp_format(const std::string& text) {
  // Tokenize, keeping operators separate and dropping comments.
  std::vector<std::pair<std::string, int>> toks;
  {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto slash = line.find('\\');
      if (slash != std::string::npos) line = line.substr(0, slash);
      std::string cur;
      auto flush = [&] {
        if (!cur.empty()) {
          toks.emplace_back(cur, line_no);
          cur.clear();
        }
      };
      for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
          flush();
        } else if (c == '<' || c == '>' || c == '=') {
          flush();
          std::string op(1, c);
          if ((c == '<' || c == '>') && i + 1 < line.size() && line[i + 1] == '=') {
            op += '=';
            ++i;
          }
          toks.emplace_back(op, line_no);
        } else if (c == ':') {
          flush();
          toks.emplace_back(":", line_no);
        } else if (c == '+' || c == '-') {
          // Sign begins a new token unless inside an exponent (1e-5).
          bool exponent = !cur.empty() &&
                          (cur.back() == 'e' || cur.back() == 'E') &&
                          is_number_start(cur);
          if (!exponent) flush();
          cur += c;
        } else {
          cur += c;
        }
      }
      flush();
    }
  }

  LinearModel model;
  std::map<std::string, int> vars;
  auto var_id = [&](const std::string& name) {
    auto it = vars.find(name);
    if (it != vars.end()) return it->second;
    int id = model.add_var(0.0, kInfinity, 0.0, name);  // LP default bounds
    vars.emplace(name, id);
    return id;
  };

  enum Section { None, Objective, Constraints, Bounds, Binaries, Done };
  Section sec = None;
  std::size_t i = 0;
  auto peek = [&]() -> const std::string& {
    static const std::string empty;
    return i < toks.size() ? toks[i].first : empty;
  };
  auto line_of = [&] { return i < toks.size() ? toks[i].second : -1; };

  auto section_of = [&](const std::string& t) -> int {
    std::string l = lower(t);
    if (l == "minimize" || l == "min") return Objective;
    if (l == "maximize" || l == "max") return Objective + 100;
    if (l == "subject") return Constraints;
    if (l == "st" || l == "s.t.") return Constraints + 200;
    if (l == "bounds" || l == "bound") return Bounds;
    if (l == "binary" || l == "binaries" || l == "bin") return Binaries;
    if (l == "end") return Done;
    return -1;
  };

  // Reads a linear expression until a relational operator or section word.
  auto read_expr = [&](std::vector<RowEntry>& entries, double& constant) {
    double sign = 1.0;
    bool pending_sign = false;
    while (i < toks.size()) {
      const std::string& t = peek();
      if (t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">") break;
      if (!pending_sign && section_of(t) >= 0) break;
      if (t == "+") {
        ++i;
        pending_sign = true;
        continue;
      }
      if (t == "-") {
        sign = -sign;
        ++i;
        pending_sign = true;
        continue;
      }
      if (is_number_start(t)) {
        double v = sign * parse_number(t, line_of());
        ++i;
        if (i < toks.size() && !peek().empty() && peek() != "+" &&
            peek() != "-" && section_of(peek()) < 0 && peek() != "<=" &&
            peek() != ">=" && peek() != "=" && !is_number_start(peek())) {
          entries.push_back({var_id(peek()), v});
          ++i;
        } else {
          constant += v;
        }
      } else {
        entries.push_back({var_id(t), sign});
        ++i;
      }
      sign = 1.0;
      pending_sign = false;
    }
  };

  bool maximize = false;
  while (i < toks.size()) {
    int s = section_of(peek());
    if (sec == None || s >= 0) {
      if (s < 0)
        throw std::runtime_error("lp parse: expected a section keyword, got '" +
                                 peek() + "' on line " + std::to_string(line_of()));
      if (s == Objective || s == Objective + 100) {
        maximize = (s == Objective + 100);
        sec = Objective;
        ++i;
      } else if (s == Constraints || s == Constraints + 200) {
        ++i;
        if (s == Constraints && lower(peek()) == "to") ++i;
        sec = Constraints;
      } else if (s == Done) {
        break;
      } else {
        sec = static_cast<Section>(s);
        ++i;
      }
      continue;
    }
    if (sec == Objective) {
      if (i + 1 < toks.size() && toks[i + 1].first == ":") i += 2;  // label
      std::vector<RowEntry> entries;
      double constant = 0.0;
      read_expr(entries, constant);
      for (const auto& e : entries) {
        model.set_obj_coeff(e.var, model.obj_coeff(e.var) + e.coeff);
      }
      model.obj_constant += constant;
    } else if (sec == Constraints) {
      if (i + 1 < toks.size() && toks[i + 1].first == ":") i += 2;
      std::vector<RowEntry> entries;
      double constant = 0.0;
      int ln = line_of();
      read_expr(entries, constant);
      const std::string op = peek();
      if (op != "<=" && op != ">=" && op != "=" && op != "<" && op != ">")
        throw std::runtime_error("lp parse: constraint without sense on line " +
                                 std::to_string(ln));
      ++i;
      double rhs = parse_number(peek(), line_of());
      ++i;
      RowSense rs = op == "=" ? RowSense::Equal
                    : (op[0] == '<' ? RowSense::LessEqual
                                    : RowSense::GreaterEqual);
      model.add_row(rs, rhs - constant, entries);
    } else if (sec == Bounds) {
      // Forms: a <= x <= b | x <= b | x >= a | x = a | x free | -inf <= x <= b
      if (is_number_start(peek())) {
        double lo = parse_number(peek(), line_of());
        ++i;
        if (peek() != "<=" && peek() != "<")
          throw std::runtime_error("lp parse: bad bound on line " +
                                   std::to_string(line_of()));
        ++i;
        int v = var_id(peek());
        ++i;
        double up = model.upper(v);
        if (peek() == "<=" || peek() == "<") {
          ++i;
          up = parse_number(peek(), line_of());
          ++i;
        }
        model.set_bounds(v, lo, up);
      } else {
        int v = var_id(peek());
        int ln = line_of();
        ++i;
        std::string t = lower(peek());
        if (t == "free") {
          model.set_bounds(v, -kInfinity, kInfinity);
          ++i;
        } else if (peek() == "<=" || peek() == "<") {
          ++i;
          model.set_bounds(v, model.lower(v), parse_number(peek(), line_of()));
          ++i;
        } else if (peek() == ">=" || peek() == ">") {
          ++i;
          model.set_bounds(v, parse_number(peek(), line_of()), model.upper(v));
          ++i;
        } else if (peek() == "=") {
          ++i;
          double b = parse_number(peek(), line_of());
          ++i;
          model.set_bounds(v, b, b);
        } else {
          throw std::runtime_error("lp parse: bad bound on line " +
                                   std::to_string(ln));
        }
      }
    } else if (sec == Binaries) {
      int v = var_id(peek());
      model.set_binary(v);
      // LP convention: binary declaration implies [0,1] unless tightened.
      double lo = std::max(model.lower(v), 0.0);
      double up = std::min(model.upper(v), 1.0);
      model.set_bounds(v, lo, up);
      ++i;
    } else {
      throw std::runtime_error("lp parse: unexpected token '" + peek() +
                               "' on line " + std::to_string(line_of()));
    }
  }
  model.sense = maximize ? ObjSense::Maximize : ObjSense::Minimize;
  return model;
}

}  // namespace gridess
