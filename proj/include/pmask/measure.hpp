#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "pmask/fairness.hpp"
#include "pmask/game.hpp"
#include "pmask/polytope.hpp"
#include "pmask/transport.hpp"

namespace pmask {

struct MeasureConfig {
  std::vector<std::pair<std::string, int>> milestones;  // (action name, side 1|2)
  double epsilon = 1e-9;
  long long max_iters = 1'000'000;
  double u_initial = 64.0;
  double u_growth = 4.0;
  bool relative_residual = true;  // relative for magnitudes > 1
  int max_escalations = 8;
};

struct ValueVector {
  std::vector<double> values;
  long long iters = 0;
  double residual = 0;
  double u_used = 0;
  bool clamp_active = false;
  double max_increase = 0;  // monotone-decrease instrumentation
};

struct MetricUndefined : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
  double residual;
  NoConvergence(double r, long long iters)
      : std::runtime_error("no convergence after " + std::to_string(iters) +
                           " iterations, residual " + std::to_string(r)),
        residual(r) {}
};

using ResolvedMilestones = std::vector<std::pair<ActionId, int>>;

/// Reward of a vertex: 1 iff it is a Verifier vertex whose (action, side)
/// is a milestone. Refuter, probabilistic and error vertices have no action
/// slot and yield 0.
inline int reward(const SymbolicVertex& v, const ResolvedMilestones& milestones) {
  if (v.kind != VertexKind::Verifier) return 0;
  for (auto& [a, side] : milestones)
    if (a == v.action && side == v.side) return 1;
  return 0;
}

inline ResolvedMilestones resolve_milestones(const SymbolicGameGraph& g,
                                             const std::vector<std::pair<std::string, int>>& named) {
  ResolvedMilestones out;
  for (auto& [name, side] : named) {
    int id = g.action_id(name);
    if (id >= 0) out.emplace_back(static_cast<ActionId>(id), side);
  }
  return out;
}

/// A matched round executes its action in both models, so an implementation
/// milestone on a non-fault action is earned whichever side the Refuter
/// moved on; fault milestones exist on side 2 only. Value iteration applies
/// this normalization before running the functional.
inline ResolvedMilestones normalize_milestones(const SymbolicGameGraph& g, const ResolvedMilestones& m) {
  ResolvedMilestones out;
  auto push = [&](ActionId a, int side) {
    for (auto& e : out)
      if (e.first == a && e.second == side) return;
    out.emplace_back(a, side);
  };
  for (auto& [a, side] : m) {
    if (g.is_fault(a)) {
      if (side == 2) push(a, 2);
    } else {
      push(a, 1);
      push(a, 2);
    }
  }
  return out;
}

namespace detail {

/// Per probabilistic vertex, the maximization over the coupling polytope is
/// taken literally over its enumerated vertices whenever the support grid is
/// small (every vertex coupling stored as a sparse weight/successor list);
/// larger grids fall back to the warm-started transportation simplex.
struct ProbSolver {
  // enumerated-vertex path: concatenated sparse couplings
  std::vector<int> vertex_begin;            // offsets into weights/targets, size k+1
  std::vector<double> weights;
  std::vector<VertexId> targets;
  // simplex fallback
  std::unique_ptr<TransportProblem> problem;
  TransportState state;
  std::vector<VertexId> cell_succ;  // row-major successor ids
  int m = 0, n = 0;
};

struct ViWorkspace {
  std::vector<int> reward;      // per vertex
  std::vector<int> prob_index;  // per vertex, -1 unless probabilistic
  std::vector<ProbSolver> solvers;
};

constexpr size_t kHotEnumerationCap = 16;

inline ViWorkspace build_workspace(const SymbolicGameGraph& g, const ResolvedMilestones& milestones) {
  ViWorkspace ws;
  ws.reward.resize(g.size());
  ws.prob_index.assign(g.size(), -1);
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v) {
    const auto& vx = g.vertex(v);
    ws.reward[v] = reward(vx, milestones);
    if (vx.kind != VertexKind::Prob) continue;
    const Dist& mu = g.dist(vx.mu);
    const Dist& mu_prime = g.dist(vx.mu_prime);
    ProbSolver solver;
    solver.m = static_cast<int>(mu.support_size());
    solver.n = static_cast<int>(mu_prime.support_size());
    CouplingSystem sys(mu, mu_prime);
    if (static_cast<size_t>(solver.m) * solver.n <= kHotEnumerationCap) {
      solver.vertex_begin.push_back(0);
      for (const Coupling& w : enumerate_vertices(sys, kHotEnumerationCap)) {
        for (auto& cell : w.cells) {
          solver.weights.push_back(rat_to_double(cell.weight));
          solver.targets.push_back(g.refuter_vertex(cell.row, cell.col));
        }
        solver.vertex_begin.push_back(static_cast<int>(solver.weights.size()));
      }
    } else {
      solver.problem = std::make_unique<TransportProblem>(mu, mu_prime);
      solver.cell_succ.resize(static_cast<size_t>(solver.m) * solver.n);
      for (int i = 0; i < solver.m; ++i)
        for (int j = 0; j < solver.n; ++j)
          solver.cell_succ[i * solver.n + j] =
              g.refuter_vertex(solver.problem->row_state(i), solver.problem->col_state(j));
    }
    ws.prob_index[v] = static_cast<int>(ws.solvers.size());
    ws.solvers.push_back(std::move(solver));
  }
  return ws;
}

inline void apply_l_inplace(const SymbolicGameGraph& g, ViWorkspace& ws, const std::vector<double>& f,
                            std::vector<double>& out, double u) {
  const double* fv = f.data();
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v) {
    const auto& vx = g.vertex(v);
    const auto& succ = g.successors(v);
    switch (vx.kind) {
      case VertexKind::Err:
        out[v] = 0;
        break;
      case VertexKind::Verifier: {
        double best = fv[succ[0]];
        for (size_t i = 1; i < succ.size(); ++i) best = std::max(best, fv[succ[i]]);
        out[v] = std::min(u, ws.reward[v] + best);
        break;
      }
      case VertexKind::Refuter: {
        double best = fv[succ[0]];
        for (size_t i = 1; i < succ.size(); ++i) best = std::min(best, fv[succ[i]]);
        out[v] = std::min(u, ws.reward[v] + best);
        break;
      }
      case VertexKind::Prob: {
        ProbSolver& solver = ws.solvers[ws.prob_index[v]];
        double value;
        if (!solver.vertex_begin.empty()) {
          value = 0;
          const int k = static_cast<int>(solver.vertex_begin.size()) - 1;
          for (int c = 0; c < k; ++c) {
            double acc = 0;
            for (int idx = solver.vertex_begin[c]; idx < solver.vertex_begin[c + 1]; ++idx)
              acc += solver.weights[idx] * fv[solver.targets[idx]];
            value = c == 0 ? acc : std::max(value, acc);
          }
        } else {
          const int n = solver.n;
          value = solver.problem->maximize(
              [&](int i, int j) { return fv[solver.cell_succ[i * n + j]]; }, solver.state);
        }
        out[v] = std::min(u, value);
        break;
      }
    }
  }
}

}  // namespace detail

/// One synchronous application of the functional L (the clamped Bellman
/// operator): P vertices maximize over the coupling polytope, Verifier
/// vertices maximize, Refuter vertices minimize, the error vertex is 0.
/// Milestones are matched exactly as given (no side normalization here).
inline std::vector<double> apply_l(const SymbolicGameGraph& g, const std::vector<double>& f, double u,
                                   const ResolvedMilestones& milestones) {
  auto ws = detail::build_workspace(g, milestones);
  std::vector<double> out(g.size());
  detail::apply_l_inplace(g, ws, f, out, u);
  return out;
}

namespace detail {

/// Core loop. `start` must be a valid from-above iterate for this u (either
/// the lattice top or the output of an earlier coarser run at the same u);
/// resuming continues the same monotone sequence.
inline ValueVector value_iteration_core(const SymbolicGameGraph& g, detail::ViWorkspace& ws,
                                        const MeasureConfig& cfg, double u, double epsilon,
                                        std::vector<double> start) {
  ValueVector vv;
  vv.u_used = u;
  std::vector<double> cur = std::move(start), next(g.size());

  for (long long it = 1; it <= cfg.max_iters; ++it) {
    detail::apply_l_inplace(g, ws, cur, next, u);
    double residual = 0, increase = 0;
    for (size_t v = 0; v < cur.size(); ++v) {
      double delta = next[v] - cur[v];
      increase = std::max(increase, delta);
      double mag = std::abs(delta);
      if (cfg.relative_residual) mag /= std::max(1.0, std::abs(cur[v]));
      residual = std::max(residual, mag);
    }
    vv.max_increase = std::max(vv.max_increase, increase);
    if (increase > 1e-7 * std::max(1.0, u))
      throw std::logic_error("internal error: value iteration iterate increased");
    cur.swap(next);
    vv.iters = it;
    vv.residual = residual;
    if (residual < epsilon) {
      vv.values = std::move(cur);
      double clamp_tol = std::max(epsilon, cfg.epsilon) * std::max(1.0, u);
      for (size_t v = 0; v < vv.values.size(); ++v)
        if (v != static_cast<size_t>(g.err()) && u - vv.values[v] <= clamp_tol) vv.clamp_active = true;
      return vv;
    }
  }
  throw NoConvergence(vv.residual, vv.iters);
}

inline std::vector<double> lattice_top(const SymbolicGameGraph& g, double u) {
  std::vector<double> top(g.size(), u);
  top[g.err()] = 0;
  return top;
}

}  // namespace detail

/// Greatest-fixpoint value iteration from above: f0 = u off the error vertex,
/// iterate L until the sup-norm residual (relative for magnitudes > 1) drops
/// below epsilon. Iterates are pointwise non-increasing; a violation beyond
/// float noise trips an internal error.
inline ValueVector value_iteration(const SymbolicGameGraph& g, const MeasureConfig& cfg, double u) {
  ResolvedMilestones milestones = normalize_milestones(g, resolve_milestones(g, cfg.milestones));
  auto ws = detail::build_workspace(g, milestones);
  return detail::value_iteration_core(g, ws, cfg, u, cfg.epsilon, detail::lattice_top(g, u));
}

inline ValueVector value_iteration(const SymbolicGameGraph& g, const MeasureConfig& cfg) {
  return value_iteration(g, cfg, cfg.u_initial);
}

struct MeasureOutcome {
  double value = 0;
  double u_used = 0;
  long long iters = 0;
  double residual = 0;
};

/// Full metric pipeline on a built graph: requires almost-sure failing under
/// fairness, then runs value iteration with the adaptive bound u (escalate
/// while any fixpoint value sits on the clamp; a clamp-inactive fixpoint is
/// u-independent). Escalation probes run at a coarser residual first; the
/// surviving u gets a full-precision pass resumed from the probe iterate.
inline MeasureOutcome measure(const SymbolicGameGraph& g, const MeasureConfig& cfg) {
  if (!decide_asf(g).asf)
    throw MetricUndefined("not almost-sure failing under fairness - metric undefined");
  ResolvedMilestones milestones = normalize_milestones(g, resolve_milestones(g, cfg.milestones));
  auto ws = detail::build_workspace(g, milestones);

  const double probe_eps = std::max(cfg.epsilon, 1e-5);
  double u = cfg.u_initial;
  long long total_iters = 0;
  for (int esc = 0; esc <= cfg.max_escalations; ++esc) {
    ValueVector vv = detail::value_iteration_core(g, ws, cfg, u, probe_eps, detail::lattice_top(g, u));
    total_iters += vv.iters;
    if (!vv.clamp_active && probe_eps > cfg.epsilon) {
      vv = detail::value_iteration_core(g, ws, cfg, u, cfg.epsilon, std::move(vv.values));
      total_iters += vv.iters;
    }
    if (!vv.clamp_active) return {vv.values[g.v0()], u, total_iters, vv.residual};
    u *= cfg.u_growth;
  }
  throw std::runtime_error("u escalation limit reached");
}

inline MeasureOutcome measure(const Pts& nominal, const Pts& impl, const MeasureConfig& cfg) {
  SymbolicGameGraph g = build(nominal, impl);
  return measure(g, cfg);
}

}  // namespace pmask
