#include "gridess/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gridess {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kLuTol = 1e-11;

using St = Basis::St;

struct ColEntry {
  int row;
  double coeff;
};

// Working problem: minimize c.v over columns v = (structurals, row slacks)
// with A v = 0, each row r reading a_r.x - s_r = 0 and the row constant
// folded into the slack bounds.
struct Working {
  int n = 0;  // structural count
  int m = 0;  // row count
  int ncols = 0;
  std::vector<double> lo, up, cost;
  std::vector<std::vector<ColEntry>> cols;
  bool maximize = false;

  explicit Working(const LinearModel& model) {
    n = model.num_vars();
    m = model.num_rows();
    ncols = n + m;
    lo.resize(ncols);
    up.resize(ncols);
    cost.assign(ncols, 0.0);
    cols.resize(ncols);
    maximize = model.sense == ObjSense::Maximize;
    for (int v = 0; v < n; ++v) {
      lo[v] = model.lower(v);
      up[v] = model.upper(v);
      cost[v] = maximize ? -model.obj_coeff(v) : model.obj_coeff(v);
    }
    for (int r = 0; r < m; ++r) {
      for (const auto& e : model.row(r)) {
        if (e.coeff != 0.0) cols[e.var].push_back({r, e.coeff});
      }
      int s = n + r;
      cols[s].push_back({r, -1.0});
      switch (model.row_sense(r)) {
        case RowSense::LessEqual:
          lo[s] = -kInfinity;
          up[s] = model.rhs(r);
          break;
        case RowSense::GreaterEqual:
          lo[s] = model.rhs(r);
          up[s] = kInfinity;
          break;
        case RowSense::Equal:
          lo[s] = model.rhs(r);
          up[s] = model.rhs(r);
          break;
      }
    }
  }
};

// Dense LU with partial pivoting plus product-form eta updates between
// refactorizations.
class BasisInverse {
 public:
  void factorize(const Working& w, const std::vector<int>& basic) {
    m_ = static_cast<int>(basic.size());
    lu_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    perm_.resize(m_);
    etas_.clear();
    ok_ = true;
    for (int k = 0; k < m_; ++k) {
      for (const auto& e : w.cols[basic[k]]) lu_[idx(e.row, k)] = e.coeff;
    }
    for (int k = 0; k < m_; ++k) perm_[k] = k;
    for (int k = 0; k < m_; ++k) {
      int piv = k;
      double best = std::abs(lu_[idx(k, k)]);
      for (int i = k + 1; i < m_; ++i) {
        double a = std::abs(lu_[idx(i, k)]);
        if (a > best) {
          best = a;
          piv = i;
        }
      }
      if (best < kLuTol) {
        ok_ = false;
        return;
      }
      if (piv != k) {
        for (int j = 0; j < m_; ++j) std::swap(lu_[idx(piv, j)], lu_[idx(k, j)]);
        std::swap(perm_[piv], perm_[k]);
      }
      double d = lu_[idx(k, k)];
      for (int i = k + 1; i < m_; ++i) {
        double f = lu_[idx(i, k)] / d;
        lu_[idx(i, k)] = f;
        if (f != 0.0) {
          for (int j = k + 1; j < m_; ++j) lu_[idx(i, j)] -= f * lu_[idx(k, j)];
        }
      }
    }
  }

  bool ok() const { return ok_; }
  int eta_count() const { return static_cast<int>(etas_.size()); }

  // w := B^{-1} a  (a given sparse)
  void ftran(const std::vector<ColEntry>& a, std::vector<double>& out) const {
    out.assign(m_, 0.0);
    for (const auto& e : a) out[e.row] += e.coeff;
    ftran_dense(out);
  }

  void ftran_dense(std::vector<double>& v) const {
    lu_solve(v);
    for (const auto& eta : etas_) apply_eta(eta, v);
  }

  // y := B^{-T} c
  void btran(std::vector<double>& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) apply_eta_t(*it, v);
    lu_solve_t(v);
  }

  // Replace basic at position `pos` given w = B^{-1} a_enter.
  void update(int pos, const std::vector<double>& w) {
    Eta eta;
    eta.pos = pos;
    eta.pivot = w[pos];
    eta.col.reserve(8);
    for (int i = 0; i < m_; ++i) {
      if (i != pos && std::abs(w[i]) > 1e-13) eta.col.push_back({i, w[i]});
    }
    etas_.push_back(std::move(eta));
  }

 private:
  struct Eta {
    int pos;
    double pivot;
    std::vector<ColEntry> col;  // off-pivot entries of w
  };

  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * m_ + c;
  }

  void lu_solve(std::vector<double>& v) const {
    tmp_.resize(m_);
    for (int i = 0; i < m_; ++i) tmp_[i] = v[perm_[i]];
    for (int i = 0; i < m_; ++i) {
      double s = tmp_[i];
      for (int j = 0; j < i; ++j) s -= lu_[idx(i, j)] * tmp_[j];
      tmp_[i] = s;
    }
    for (int i = m_ - 1; i >= 0; --i) {
      double s = tmp_[i];
      for (int j = i + 1; j < m_; ++j) s -= lu_[idx(i, j)] * tmp_[j];
      tmp_[i] = s / lu_[idx(i, i)];
    }
    v = tmp_;
  }

  void lu_solve_t(std::vector<double>& v) const {
    tmp_ = v;
    for (int i = 0; i < m_; ++i) {
      double s = tmp_[i];
      for (int j = 0; j < i; ++j) s -= lu_[idx(j, i)] * tmp_[j];
      tmp_[i] = s / lu_[idx(i, i)];
    }
    for (int i = m_ - 1; i >= 0; --i) {
      double s = tmp_[i];
      for (int j = i + 1; j < m_; ++j) s -= lu_[idx(j, i)] * tmp_[j];
      tmp_[i] = s;
    }
    for (int i = 0; i < m_; ++i) v[perm_[i]] = tmp_[i];
  }

  // E^{-1} v where E is the elementary matrix of the pivot.
  void apply_eta(const Eta& e, std::vector<double>& v) const {
    double piv = v[e.pos] / e.pivot;
    v[e.pos] = piv;
    if (piv != 0.0) {
      for (const auto& c : e.col) v[c.row] -= c.coeff * piv;
    }
  }

  void apply_eta_t(const Eta& e, std::vector<double>& v) const {
    double s = v[e.pos];
    for (const auto& c : e.col) s -= c.coeff * v[c.row];
    v[e.pos] = s / e.pivot;
  }

  int m_ = 0;
  bool ok_ = false;
  std::vector<double> lu_;
  std::vector<int> perm_;
  std::vector<Eta> etas_;
  mutable std::vector<double> tmp_;
};

class SimplexSolver {
 public:
  SimplexSolver(const LinearModel& model, const SimplexOptions& opt)
      : model_(model), w_(model), opt_(opt) {}

  Solution run(const Basis* warm) {
    Solution sol;
    for (int j = 0; j < w_.ncols; ++j) {
      if (w_.lo[j] > w_.up[j] + 1e-12) {
        sol.status = SolveStatus::Infeasible;
        return sol;
      }
    }
    if (w_.m == 0) return solve_unconstrained();

    init_status(warm);
    if (!refactor_and_recompute()) {
      reset_slack_basis();
      if (!refactor_and_recompute()) {
        sol.status = SolveStatus::Infeasible;  // should not happen
        return sol;
      }
    }

    long max_iter = opt_.max_iterations >= 0
                        ? opt_.max_iterations
                        : 20000 + 100L * w_.m;
    auto t0 = std::chrono::steady_clock::now();
    long iter = 0;
    int stall = 0;
    bool bland = false;
    double last_merit = kInfinity;
    int verify_rounds = 0;

    while (true) {
      if (iter >= max_iter) return finish(SolveStatus::IterationLimit, iter);
      if (opt_.time_limit_sec > 0 && iter % 64 == 0) {
        double el = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        if (el > opt_.time_limit_sec)
          return finish(SolveStatus::TimeLimit, iter);
      }

      bool phase1 = compute_phase();
      compute_duals(phase1);

      int enter = -1;
      double best = bland ? 0.0 : opt_.opt_tol;
      int sigma = 0;
      for (int j = 0; j < w_.ncols; ++j) {
        St st = status_[j];
        if (st == St::Basic) continue;
        if (w_.lo[j] == w_.up[j]) continue;  // fixed stays put
        double d = dj_[j];
        int sig = 0;
        if (st == St::AtLower || st == St::FreeNonbasic) {
          if (d < -opt_.opt_tol) sig = +1;
        }
        if (sig == 0 && (st == St::AtUpper || st == St::FreeNonbasic)) {
          if (d > opt_.opt_tol) sig = -1;
        }
        if (sig == 0) continue;
        if (bland) {  // lowest eligible index
          enter = j;
          sigma = sig;
          break;
        }
        // Dantzig; ties go to the later column (slack-like blocks sit at
        // the end of dispatch models and make cheaper basis columns).
        if (std::abs(d) >= best) {
          best = std::abs(d);
          enter = j;
          sigma = sig;
        }
      }

      if (enter < 0) {
        // Candidate-optimal for the current phase; verify on a fresh basis.
        if (verify_rounds < 3 && bi_.eta_count() > 0) {
          ++verify_rounds;
          if (!refactor_and_recompute()) reset_and_refactor();
          continue;
        }
        if (phase1) return finish(SolveStatus::Infeasible, iter);
        return finish(SolveStatus::Optimal, iter);
      }

      bi_.ftran(w_.cols[enter], work_);
      const std::vector<double>& dir = work_;

      // Ratio test: entering moves by sigma * t, basic k by -sigma * dir[k].
      double t_best = sigma > 0 ? w_.up[enter] - xn_[enter]
                                : xn_[enter] - w_.lo[enter];
      if (std::isinf(t_best)) t_best = kInfinity;
      int leave_pos = -1;   // -1 with finite t_best: bound flip
      int leave_side = 0;   // -1 lower, +1 upper
      double leave_abs = 0.0;
      for (int k = 0; k < w_.m; ++k) {
        double wk = dir[k];
        if (std::abs(wk) < kPivotTol) continue;
        int v = basic_[k];
        double rate = -sigma * wk;
        double xv = xb_[k];
        double cand = kInfinity;
        int side = 0;
        if (xv < w_.lo[v] - opt_.feas_tol) {
          if (rate > 0) {
            cand = (w_.lo[v] - xv) / rate;
            side = -1;
          }
        } else if (xv > w_.up[v] + opt_.feas_tol) {
          if (rate < 0) {
            cand = (w_.up[v] - xv) / rate;
            side = +1;
          }
        } else if (rate > 0 && w_.up[v] < kInfinity) {
          cand = (w_.up[v] - xv) / rate;
          side = +1;
        } else if (rate < 0 && w_.lo[v] > -kInfinity) {
          cand = (w_.lo[v] - xv) / rate;
          side = -1;
        }
        if (side == 0) continue;
        if (cand < 0) cand = 0;
        bool take = false;
        if (cand < t_best - 1e-12) {
          take = true;
        } else if (cand < t_best + 1e-12 && leave_pos >= 0) {
          if (bland) {
            take = basic_[k] < basic_[leave_pos];
          } else {
            take = std::abs(wk) > leave_abs + 1e-12;
          }
        } else if (cand < t_best + 1e-12 && leave_pos < 0 &&
                   t_best == kInfinity) {
          take = true;
        }
        if (take) {
          t_best = cand;
          leave_pos = k;
          leave_side = side;
          leave_abs = std::abs(wk);
        }
      }

      if (t_best == kInfinity) {
        if (phase1) {
          // Numerically impossible direction; rebuild and retry once.
          if (!bland) {
            bland = true;
            reset_and_refactor();
            continue;
          }
          return finish(SolveStatus::Infeasible, iter);
        }
        return finish(SolveStatus::Unbounded, iter);
      }

      // Apply the step.
      double merit = phase1 ? infeasibility() : current_objective();
      if (t_best <= 1e-12) {
        ++stall;
      } else if (merit < last_merit - 1e-12) {
        stall = 0;
        if (bland) bland = false;
      } else {
        ++stall;
      }
      last_merit = merit;
      if (stall > 400 && !bland) {
        bland = true;  // Bland's rule until progress resumes
        stall = 0;
      }

      for (int k = 0; k < w_.m; ++k) xb_[k] -= sigma * dir[k] * t_best;

      if (leave_pos < 0) {
        // Bound flip of the entering variable.
        status_[enter] = (sigma > 0) ? St::AtUpper : St::AtLower;
        xn_[enter] = (sigma > 0) ? w_.up[enter] : w_.lo[enter];
      } else {
        int leaving = basic_[leave_pos];
        double enter_val = xn_[enter] + sigma * t_best;
        status_[leaving] = (leave_side < 0) ? St::AtLower : St::AtUpper;
        xn_[leaving] = (leave_side < 0) ? w_.lo[leaving] : w_.up[leaving];
        status_[enter] = St::Basic;
        basic_[leave_pos] = enter;
        xb_[leave_pos] = enter_val;
        bi_.update(leave_pos, dir);
        if (bi_.eta_count() >= opt_.refactor_every) {
          if (!refactor_and_recompute()) reset_and_refactor();
        }
      }
      ++iter;
      verify_rounds = 0;
    }
  }

 private:
  Solution solve_unconstrained() {
    Solution sol;
    sol.primal.assign(w_.n, 0.0);
    double z = 0.0;
    for (int j = 0; j < w_.n; ++j) {
      double c = w_.cost[j];
      double x;
      if (c > 0) {
        if (w_.lo[j] <= -kInfinity) {
          sol.status = SolveStatus::Unbounded;
          return sol;
        }
        x = w_.lo[j];
      } else if (c < 0) {
        if (w_.up[j] >= kInfinity) {
          sol.status = SolveStatus::Unbounded;
          return sol;
        }
        x = w_.up[j];
      } else {
        x = std::clamp(0.0, w_.lo[j], w_.up[j]);
      }
      sol.primal[j] = x;
      z += c * x;
    }
    sol.status = SolveStatus::Optimal;
    sol.objective = (w_.maximize ? -z : z) + model_.obj_constant;
    sol.bound = sol.objective;
    sol.reduced_costs.assign(w_.n, 0.0);
    for (int j = 0; j < w_.n; ++j)
      sol.reduced_costs[j] = model_.obj_coeff(j);
    sol.basis.status.assign(w_.ncols, St::AtLower);
    return sol;
  }

  void init_status(const Basis* warm) {
    status_.assign(w_.ncols, St::AtLower);
    if (warm && static_cast<int>(warm->status.size()) == w_.ncols) {
      status_ = warm->status;
      int nb = 0;
      for (auto s : status_) nb += (s == St::Basic);
      if (nb != w_.m) {
        reset_slack_basis();
        return;
      }
      // Bounds may have changed since the basis was taken.
      for (int j = 0; j < w_.ncols; ++j) {
        if (status_[j] == St::AtLower && w_.lo[j] <= -kInfinity)
          status_[j] = w_.up[j] < kInfinity ? St::AtUpper : St::FreeNonbasic;
        if (status_[j] == St::AtUpper && w_.up[j] >= kInfinity)
          status_[j] = w_.lo[j] > -kInfinity ? St::AtLower : St::FreeNonbasic;
      }
      return;
    }
    reset_slack_basis();
  }

  void reset_slack_basis() {
    // Variables whose range straddles zero start nonbasic at zero; keeping
    // flows and angles off their bounds gives phase 1 a clean start and
    // leaves costless variables at zero in the final point.
    status_.assign(w_.ncols, St::AtLower);
    for (int j = 0; j < w_.n; ++j) {
      if (w_.lo[j] > -kInfinity && w_.lo[j] >= 0.0)
        status_[j] = St::AtLower;
      else if (w_.up[j] < kInfinity && w_.up[j] <= 0.0)
        status_[j] = St::AtUpper;
      else
        status_[j] = St::FreeNonbasic;  // nonbasic at zero
    }
    for (int r = 0; r < w_.m; ++r) status_[w_.n + r] = St::Basic;
  }

  void reset_and_refactor() {
    reset_slack_basis();
    refactor_and_recompute();
  }

  bool refactor_and_recompute() {
    basic_.clear();
    xn_.assign(w_.ncols, 0.0);
    for (int j = 0; j < w_.ncols; ++j) {
      switch (status_[j]) {
        case St::Basic:
          basic_.push_back(j);
          break;
        case St::AtLower:
          xn_[j] = w_.lo[j];
          break;
        case St::AtUpper:
          xn_[j] = w_.up[j];
          break;
        case St::FreeNonbasic:
          xn_[j] = std::clamp(0.0, w_.lo[j], w_.up[j]);
          break;
      }
    }
    if (static_cast<int>(basic_.size()) != w_.m) return false;
    bi_.factorize(w_, basic_);
    if (!bi_.ok()) return false;
    // x_B = -B^{-1} N x_N  (rows have zero right-hand side by construction)
    std::vector<double> rhs(w_.m, 0.0);
    for (int j = 0; j < w_.ncols; ++j) {
      if (status_[j] == St::Basic || xn_[j] == 0.0) continue;
      for (const auto& e : w_.cols[j]) rhs[e.row] -= e.coeff * xn_[j];
    }
    bi_.ftran_dense(rhs);
    xb_ = rhs;
    return true;
  }

  bool compute_phase() {
    for (int k = 0; k < w_.m; ++k) {
      int v = basic_[k];
      if (xb_[k] < w_.lo[v] - opt_.feas_tol ||
          xb_[k] > w_.up[v] + opt_.feas_tol)
        return true;
    }
    return false;
  }

  double infeasibility() const {
    double s = 0.0;
    for (int k = 0; k < w_.m; ++k) {
      int v = basic_[k];
      if (xb_[k] < w_.lo[v]) s += w_.lo[v] - xb_[k];
      if (xb_[k] > w_.up[v]) s += xb_[k] - w_.up[v];
    }
    return s;
  }

  double current_objective() const {
    double z = 0.0;
    for (int j = 0; j < w_.ncols; ++j)
      if (status_[j] != St::Basic) z += w_.cost[j] * xn_[j];
    for (int k = 0; k < w_.m; ++k) z += w_.cost[basic_[k]] * xb_[k];
    return z;
  }

  void compute_duals(bool phase1) {
    y_.assign(w_.m, 0.0);
    for (int k = 0; k < w_.m; ++k) {
      int v = basic_[k];
      if (phase1) {
        if (xb_[k] < w_.lo[v] - opt_.feas_tol)
          y_[k] = -1.0;
        else if (xb_[k] > w_.up[v] + opt_.feas_tol)
          y_[k] = 1.0;
        else
          y_[k] = 0.0;
      } else {
        y_[k] = w_.cost[v];
      }
    }
    bi_.btran(y_);
    dj_.assign(w_.ncols, 0.0);
    for (int j = 0; j < w_.ncols; ++j) {
      if (status_[j] == St::Basic) continue;
      double d = phase1 ? 0.0 : w_.cost[j];
      for (const auto& e : w_.cols[j]) d -= y_[e.row] * e.coeff;
      dj_[j] = d;
    }
  }

  Solution finish(SolveStatus st, long iter) {
    Solution sol;
    sol.status = st;
    sol.iterations = iter;
    sol.basis.status = status_;
    if (st != SolveStatus::Optimal) {
      if (st == SolveStatus::IterationLimit || st == SolveStatus::TimeLimit) {
        extract_point(sol);
      }
      return sol;
    }
    extract_point(sol);
    // Duals from the final basis with the true cost vector.
    compute_duals(false);
    double flip = w_.maximize ? -1.0 : 1.0;
    sol.dual.resize(w_.m);
    sol.reduced_costs.resize(w_.n);
    for (int r = 0; r < w_.m; ++r) sol.dual[r] = flip * y_[r];
    for (int j = 0; j < w_.n; ++j) {
      double d = status_[j] == St::Basic ? 0.0 : dj_[j];
      sol.reduced_costs[j] = flip * d;
    }
    sol.bound = sol.objective;
    return sol;
  }

  void extract_point(Solution& sol) {
    std::vector<double> x(w_.ncols, 0.0);
    for (int j = 0; j < w_.ncols; ++j)
      if (status_[j] != St::Basic) x[j] = xn_[j];
    for (int k = 0; k < w_.m; ++k) x[basic_[k]] = xb_[k];
    sol.primal.assign(x.begin(), x.begin() + w_.n);
    double z = 0.0;
    for (int j = 0; j < w_.ncols; ++j) z += w_.cost[j] * x[j];
    sol.objective = (w_.maximize ? -z : z) + model_.obj_constant;
  }

  const LinearModel& model_;
  Working w_;
  SimplexOptions opt_;
  BasisInverse bi_;
  std::vector<St> status_;
  std::vector<int> basic_;
  std::vector<double> xb_, xn_, y_, dj_, work_;
};

}  // namespace

Solution solve_lp(const LinearModel& model, const SimplexOptions& options,
                  const Basis* warm) {
  SimplexSolver solver(model, options);
  return solver.run(warm);
}

double dual_objective_value(const LinearModel& model, const Solution& sol) {
  // Evaluate on the minimize-equivalent, then restore the sense.
  double flip = model.sense == ObjSense::Maximize ? -1.0 : 1.0;
  double z = 0.0;
  for (int r = 0; r < model.num_rows(); ++r) z += flip * sol.dual[r] * model.rhs(r);
  for (int v = 0; v < model.num_vars(); ++v) {
    double d = flip * sol.reduced_costs[v];
    if (d > 1e-7) {
      z += d * model.lower(v);
    } else if (d < -1e-7) {
      z += d * model.upper(v);
    }
  }
  return flip * z + model.obj_constant;
}

}  // namespace gridess
