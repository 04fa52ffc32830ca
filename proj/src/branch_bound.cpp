#include "gridess/branch_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <vector>

namespace gridess {

namespace {

struct Node {
  std::vector<std::pair<int, double>> fixings;  // (binary var, 0 or 1)
  double lp_bound;                              // in minimize terms
  long id;
  std::shared_ptr<Basis> warm;
};

struct NodeOrder {
  // Best bound first; FIFO on ties for determinism.
  bool operator()(const Node& a, const Node& b) const {
    if (a.lp_bound != b.lp_bound) return a.lp_bound > b.lp_bound;
    return a.id > b.id;
  }
};

double rel_gap(double incumbent, double bound) {
  return std::abs(incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

}  // namespace

Solution solve_mip(const LinearModel& model, const MipOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  const bool maximize = model.sense == ObjSense::Maximize;
  const double dir = maximize ? -1.0 : 1.0;  // work in minimize terms
  const std::vector<int> binaries = model.binary_vars();

  LinearModel work = model;
  auto solve_node = [&](const std::vector<std::pair<int, double>>& fixings,
                        const Basis* warm) {
    for (const auto& [v, val] : fixings) work.set_bounds(v, val, val);
    SimplexOptions lp = options.lp;
    if (options.time_limit_sec > 0)
      lp.time_limit_sec = std::max(1.0, options.time_limit_sec - elapsed());
    Solution s = solve_lp(work, lp, warm);
    for (const auto& [v, val] : fixings)
      work.set_bounds(v, model.lower(v), model.upper(v));
    return s;
  };

  auto fractional_of = [&](const std::vector<double>& x) {
    int pick = -1;
    double best = options.int_tol;
    for (int v : binaries) {
      double f = x[v] - std::floor(x[v]);
      double frac = std::min(f, 1.0 - f);
      if (frac > best + 1e-12) {
        best = frac;
        pick = v;
      }
    }
    return pick;
  };

  Solution root = solve_node({}, nullptr);
  if (binaries.empty()) return root;
  if (root.status != SolveStatus::Optimal) return root;
  if (fractional_of(root.primal) < 0) {
    root.nodes = 1;
    return root;  // integral at the root: nothing to branch on
  }

  Solution incumbent;
  double inc_obj = kInfinity;  // minimize terms
  double proven_bound = dir * root.objective;
  long nodes_done = 0;
  bool hit_time = false, hit_nodes = false;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push(Node{{}, dir * root.objective, next_id++,
                 std::make_shared<Basis>(root.basis)});

  while (!open.empty()) {
    if (options.time_limit_sec > 0 && elapsed() > options.time_limit_sec) {
      hit_time = true;
      proven_bound = open.top().lp_bound;
      break;
    }
    if (nodes_done >= options.max_nodes) {
      hit_nodes = true;
      proven_bound = open.top().lp_bound;
      break;
    }
    Node node = open.top();
    open.pop();
    proven_bound = node.lp_bound;  // best-first: the global proven bound
    if (inc_obj < kInfinity &&
        rel_gap(inc_obj, proven_bound) <= options.gap_tol)
      break;

    Solution s = solve_node(node.fixings, node.warm.get());
    ++nodes_done;
    if (s.status == SolveStatus::TimeLimit) {
      hit_time = true;
      break;
    }
    if (s.status != SolveStatus::Optimal) continue;  // infeasible: pruned
    double z = dir * s.objective;

    int branch_var = fractional_of(s.primal);
    if (branch_var < 0) {
      if (z < inc_obj - 1e-12) {
        inc_obj = z;
        incumbent = s;
      }
      continue;
    }
    if (z >= inc_obj - 1e-12) continue;  // cannot beat the incumbent
    auto warm = std::make_shared<Basis>(s.basis);
    for (double val : {0.0, 1.0}) {
      Node child;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch_var, val);
      child.lp_bound = z;
      child.id = next_id++;
      child.warm = warm;
      open.push(std::move(child));
    }
  }
  if (open.empty() && !hit_time && !hit_nodes && inc_obj < kInfinity)
    proven_bound = inc_obj;  // tree fully closed

  Solution out;
  if (inc_obj < kInfinity) {
    out = incumbent;
    out.objective = maximize ? -inc_obj : inc_obj;
    out.bound = maximize ? -proven_bound : proven_bound;
    out.dual.clear();
    out.reduced_costs.clear();
    bool closed = rel_gap(inc_obj, proven_bound) <= options.gap_tol;
    out.status = closed ? SolveStatus::Optimal
                        : (hit_time ? SolveStatus::TimeLimit
                                    : SolveStatus::IterationLimit);
  } else {
    out.status = hit_time ? SolveStatus::TimeLimit
                          : (hit_nodes ? SolveStatus::IterationLimit
                                       : SolveStatus::Infeasible);
    out.bound = maximize ? -proven_bound : proven_bound;
  }
  out.nodes = nodes_done;
  return out;
}

}  // namespace gridess
