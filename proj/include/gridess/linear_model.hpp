#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace gridess {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class ObjSense { Minimize, Maximize };

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct RowEntry {
  int var;
  double coeff;
};

/// Sparse linear model: bounded columns, sparse rows, optional binary markers.
/// Immutable once handed to a solver; builders append, solvers only read.
class LinearModel {
 public:
  ObjSense sense = ObjSense::Minimize;
  double obj_constant = 0.0;

  int add_var(double lower, double upper, double obj_coeff,
              std::string name = {}) {
    lower_.push_back(lower);
    upper_.push_back(upper);
    obj_.push_back(obj_coeff);
    names_.push_back(std::move(name));
    binary_.push_back(0);
    return static_cast<int>(lower_.size()) - 1;
  }

  int add_row(RowSense sense_in, double rhs, std::vector<RowEntry> entries) {
    row_sense_.push_back(sense_in);
    rhs_.push_back(rhs);
    rows_.push_back(std::move(entries));
    return static_cast<int>(rhs_.size()) - 1;
  }

  void set_binary(int var) { binary_.at(var) = 1; }
  void set_bounds(int var, double lower, double upper) {
    lower_.at(var) = lower;
    upper_.at(var) = upper;
  }
  void set_obj_coeff(int var, double c) { obj_.at(var) = c; }

  int num_vars() const { return static_cast<int>(lower_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  int num_binaries() const {
    int n = 0;
    for (char b : binary_) n += b;
    return n;
  }
  int num_nonzeros() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return static_cast<int>(n);
  }

  double lower(int v) const { return lower_[v]; }
  double upper(int v) const { return upper_[v]; }
  double obj_coeff(int v) const { return obj_[v]; }
  bool is_binary(int v) const { return binary_[v] != 0; }
  const std::string& raw_name(int v) const { return names_[v]; }
  /// Stable export name: user label if set, else x<index>.
  std::string var_name(int v) const {
    return names_[v].empty() ? "x" + std::to_string(v) : names_[v];
  }

  RowSense row_sense(int r) const { return row_sense_[r]; }
  double rhs(int r) const { return rhs_[r]; }
  const std::vector<RowEntry>& row(int r) const { return rows_[r]; }

  std::vector<int> binary_vars() const {
    std::vector<int> out;
    for (int v = 0; v < num_vars(); ++v)
      if (binary_[v]) out.push_back(v);
    return out;
  }

  /// Row activity a_r . x for a candidate point.
  double row_activity(int r, const std::vector<double>& x) const {
    double a = 0.0;
    for (const auto& e : rows_[r]) a += e.coeff * x[e.var];
    return a;
  }

  /// Largest violation of rows and bounds at a candidate point.
  double max_violation(const std::vector<double>& x) const {
    double viol = 0.0;
    for (int v = 0; v < num_vars(); ++v) {
      if (lower_[v] > -kInfinity && x[v] < lower_[v])
        viol = std::max(viol, lower_[v] - x[v]);
      if (upper_[v] < kInfinity && x[v] > upper_[v])
        viol = std::max(viol, x[v] - upper_[v]);
    }
    for (int r = 0; r < num_rows(); ++r) {
      double a = row_activity(r, x);
      switch (row_sense_[r]) {
        case RowSense::LessEqual:
          viol = std::max(viol, a - rhs_[r]);
          break;
        case RowSense::GreaterEqual:
          viol = std::max(viol, rhs_[r] - a);
          break;
        case RowSense::Equal:
          viol = std::max(viol, std::abs(a - rhs_[r]));
          break;
      }
    }
    return viol;
  }

  double objective_value(const std::vector<double>& x) const {
    double z = obj_constant;
    for (int v = 0; v < num_vars(); ++v) z += obj_[v] * x[v];
    return z;
  }

 private:
  std::vector<double> lower_, upper_, obj_;
  std::vector<std::string> names_;
  std::vector<char> binary_;
  std::vector<RowSense> row_sense_;
  std::vector<double> rhs_;
  std::vector<std::vector<RowEntry>> rows_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit };

const char* to_string(SolveStatus s);

/// Basis snapshot used for warm starts; opaque outside the simplex.
struct Basis {
  enum class St : std::uint8_t { Basic, AtLower, AtUpper, FreeNonbasic };
  std::vector<St> status;  // structurals first, then one slack per row
  bool empty() const { return status.empty(); }
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> dual;           // row multipliers, LP solves only
  std::vector<double> reduced_costs;  // LP solves only
  double bound = 0.0;                 // best proven bound (B&B)
  Basis basis;
  long iterations = 0;
  long nodes = 0;  // B&B only

  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Dual objective recomputed from (dual, reduced_costs) and model data alone.
/// Equals the primal objective at a true optimum; used for strong-duality checks.
double dual_objective_value(const LinearModel& model, const Solution& sol);

}  // namespace gridess
