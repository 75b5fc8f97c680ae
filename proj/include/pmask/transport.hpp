#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pmask/coupling.hpp"

namespace pmask {

/// Persistent simplex basis for one coupling polytope, reusable across solves
/// with different objectives (warm start). The basis is a spanning tree of
/// the bipartite support graph; weights are exact rationals.
struct TransportState {
  struct BasisCell {
    int r, c;
    Rat w;
    double wd;
  };
  std::vector<BasisCell> basis;
  bool valid = false;
};

/// Linear maximization over an (unconstrained) coupling polytope via the
/// transportation simplex: northwest-corner start, cycle pivoting, Bland's
/// rule on both the entering and the leaving cell.
class TransportProblem {
 public:
  TransportProblem(const Dist& row_margins, const Dist& col_margins) {
    for (auto& [s, w] : row_margins.entries()) {
      row_states_.push_back(s);
      row_mass_.push_back(w);
    }
    for (auto& [s, w] : col_margins.entries()) {
      col_states_.push_back(s);
      col_mass_.push_back(w);
    }
  }

  int rows() const { return static_cast<int>(row_states_.size()); }
  int cols() const { return static_cast<int>(col_states_.size()); }
  StateId row_state(int i) const { return row_states_[i]; }
  StateId col_state(int j) const { return col_states_[j]; }

  /// Maximizes sum w(r,c)*obj(r,c); obj is indexed by grid position. The
  /// state carries the optimal basis out (a polytope vertex).
  double maximize(const std::function<double(int, int)>& obj, TransportState& state) const {
    const int m = rows(), n = cols();
    if (!state.valid || state.basis.size() != static_cast<size_t>(m + n - 1)) northwest_corner(state);

    std::vector<double> cost(static_cast<size_t>(m) * n);
    double scale = 1.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        cost[i * n + j] = obj(i, j);
        scale = std::max(scale, std::abs(cost[i * n + j]));
      }
    const double tol = 1e-12 * scale;

    std::vector<double> u(m), v(n);
    std::vector<char> in_basis(static_cast<size_t>(m) * n);
    int pivots = 0;
    const int pivot_cap = 64 * (m + 1) * (n + 1);
    while (true) {
      compute_duals(state, cost, u, v);
      std::fill(in_basis.begin(), in_basis.end(), 0);
      for (auto& b : state.basis) in_basis[b.r * n + b.c] = 1;

      int enter = -1;
      for (int idx = 0; idx < m * n && enter < 0; ++idx)
        if (!in_basis[idx] && cost[idx] - u[idx / n] - v[idx % n] > tol) enter = idx;
      if (enter < 0) break;
      pivot(state, enter / n, enter % n);
      if (++pivots > pivot_cap) throw std::runtime_error("transportation simplex: pivot cap exceeded");
    }
    state.valid = true;

    double value = 0;
    for (auto& b : state.basis) value += b.wd * cost[b.r * n + b.c];
    return value;
  }

  Coupling extract(const TransportState& state) const {
    Coupling out;
    for (auto& b : state.basis)
      if (b.w > 0) out.cells.push_back({row_states_[b.r], col_states_[b.c], b.w});
    std::sort(out.cells.begin(), out.cells.end(), [](const Coupling::Cell& a, const Coupling::Cell& b) {
      return std::make_pair(a.row, a.col) < std::make_pair(b.row, b.col);
    });
    return out;
  }

 private:
  void northwest_corner(TransportState& state) const {
    const int m = rows(), n = cols();
    state.basis.clear();
    std::vector<Rat> a(row_mass_), b(col_mass_);
    int i = 0, j = 0;
    while (true) {
      Rat w = std::min(a[i], b[j]);
      state.basis.push_back({i, j, w, rat_to_double(w)});
      a[i] -= w;
      b[j] -= w;
      if (i == m - 1 && j == n - 1) break;
      if (a[i] == 0 && i < m - 1)
        ++i;
      else
        ++j;
    }
    state.valid = true;
  }

  // Tree duals: u[r] + v[c] = cost(r,c) on basis cells, rooted at row 0.
  void compute_duals(const TransportState& state, const std::vector<double>& cost, std::vector<double>& u,
                     std::vector<double>& v) const {
    const int m = rows(), n = cols();
    std::vector<std::vector<int>> adj(m + n);
    for (int k = 0; k < static_cast<int>(state.basis.size()); ++k) {
      adj[state.basis[k].r].push_back(k);
      adj[m + state.basis[k].c].push_back(k);
    }
    std::vector<char> seen(m + n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    u[0] = 0;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      for (int k : adj[node]) {
        const auto& b = state.basis[k];
        int other = node < m ? m + b.c : b.r;
        if (seen[other]) continue;
        seen[other] = 1;
        if (other < m)
          u[other] = cost[b.r * n + b.c] - v[b.c];
        else
          v[other - m] = cost[b.r * n + b.c] - u[b.r];
        stack.push_back(other);
      }
    }
  }

  void pivot(TransportState& state, int er, int ec) const {
    const int m = rows(), n = cols();
    // Unique tree path from row node er to col node m+ec.
    std::vector<std::vector<std::pair<int, int>>> adj(m + n);  // (basis idx, other node)
    for (int k = 0; k < static_cast<int>(state.basis.size()); ++k) {
      const auto& b = state.basis[k];
      adj[b.r].emplace_back(k, m + b.c);
      adj[m + b.c].emplace_back(k, b.r);
    }
    std::vector<int> parent_edge(m + n, -1), parent_node(m + n, -1);
    std::vector<char> seen(m + n, 0);
    std::vector<int> stack{er};
    seen[er] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      if (node == m + ec) break;
      for (auto& [k, other] : adj[node])
        if (!seen[other]) {
          seen[other] = 1;
          parent_edge[other] = k;
          parent_node[other] = node;
          stack.push_back(other);
        }
    }
    std::vector<int> path;  // basis indices from ec back to er
    for (int node = m + ec; node != er; node = parent_node[node]) path.push_back(parent_edge[node]);

    // Signs around the cycle: the path edge incident to er is in row er and
    // alternates with the entering cell, so path[last] is -, then +, ...
    std::vector<int> minus, plus;
    for (size_t idx = 0; idx < path.size(); ++idx) {
      bool is_minus = ((path.size() - 1 - idx) % 2) == 0;
      (is_minus ? minus : plus).push_back(path[idx]);
    }

    int leave = -1;
    Rat theta;
    for (int k : minus) {
      const auto& b = state.basis[k];
      bool better = leave < 0 || b.w < theta;
      if (!better && b.w == theta)
        better = std::make_pair(b.r, b.c) < std::make_pair(state.basis[leave].r, state.basis[leave].c);
      if (better) {
        theta = b.w;
        leave = k;
      }
    }

    for (int k : minus) {
      state.basis[k].w -= theta;
      state.basis[k].wd = rat_to_double(state.basis[k].w);
    }
    for (int k : plus) {
      state.basis[k].w += theta;
      state.basis[k].wd = rat_to_double(state.basis[k].w);
    }
    state.basis[leave] = {er, ec, theta, rat_to_double(theta)};
  }

  std::vector<StateId> row_states_, col_states_;
  std::vector<Rat> row_mass_, col_mass_;
};

struct MaximizeResult {
  double value;
  Coupling argmax;
};

/// Linear maximization over the full coupling polytope of sys (no forbidden
/// cells); objective keyed by state pair. The optimum is attained at a
/// polytope vertex, which is returned as the witness coupling.
inline MaximizeResult maximize(const CouplingSystem& sys,
                               const std::function<double(StateId, StateId)>& objective) {
  if (!sys.forbidden.empty())
    throw std::invalid_argument("maximize expects an unconstrained coupling system");
  TransportProblem problem(sys.row_margins, sys.col_margins);
  TransportState state;
  double value = problem.maximize(
      [&](int i, int j) { return objective(problem.row_state(i), problem.col_state(j)); }, state);
  return {value, problem.extract(state)};
}

}  // namespace pmask
