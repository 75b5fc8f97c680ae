#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "pmask/dist.hpp"

namespace pmask {

/// Margins of a coupling polytope plus a set of forbidden cells. Realizes the
/// equation system attached to a probabilistic game vertex: a solution is a
/// coupling of (row_margins, col_margins) with zero mass on every forbidden
/// cell. Forbidden pairs outside the support grid are dropped on construction.
struct CouplingSystem {
  Dist row_margins;
  Dist col_margins;
  std::vector<std::pair<StateId, StateId>> forbidden;  // sorted, in-grid

  CouplingSystem(Dist rows, Dist cols, std::vector<std::pair<StateId, StateId>> forbid = {})
      : row_margins(std::move(rows)), col_margins(std::move(cols)) {
    std::sort(forbid.begin(), forbid.end());
    forbid.erase(std::unique(forbid.begin(), forbid.end()), forbid.end());
    for (auto& cell : forbid)
      if (row_margins.in_support(cell.first) && col_margins.in_support(cell.second))
        forbidden.push_back(cell);
  }

  bool is_forbidden(StateId r, StateId c) const {
    return std::binary_search(forbidden.begin(), forbidden.end(), std::make_pair(r, c));
  }
};

/// A concrete coupling: sparse nonnegative weights whose row sums are the row
/// margins and column sums the column margins.
struct Coupling {
  struct Cell {
    StateId row, col;
    Rat weight;
    bool operator==(const Cell& o) const { return row == o.row && col == o.col && weight == o.weight; }
  };
  std::vector<Cell> cells;  // sorted by (row, col), weights > 0

  bool operator==(const Coupling& o) const { return cells == o.cells; }

  Rat weight(StateId r, StateId c) const {
    for (auto& cell : cells)
      if (cell.row == r && cell.col == c) return cell.weight;
    return Rat(0);
  }
};

namespace detail {

/// Exact max-flow (Edmonds-Karp) on the bipartite support graph with the
/// forbidden cells removed. A coupling avoiding the forbidden cells exists
/// iff the max flow is 1.
inline bool coupling_feasible_maxflow(const CouplingSystem& sys) {
  const auto& rows = sys.row_margins.entries();
  const auto& cols = sys.col_margins.entries();
  const int m = static_cast<int>(rows.size());
  const int n = static_cast<int>(cols.size());
  const int source = m + n, sink = m + n + 1, nodes = m + n + 2;

  // capacity matrix; row nodes 0..m-1, col nodes m..m+n-1
  std::vector<std::vector<Rat>> cap(nodes, std::vector<Rat>(nodes, Rat(0)));
  for (int i = 0; i < m; ++i) cap[source][i] = rows[i].second;
  for (int j = 0; j < n; ++j) cap[m + j][sink] = cols[j].second;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (!sys.is_forbidden(rows[i].first, cols[j].first)) cap[i][m + j] = Rat(2);  // > total mass

  Rat flow = 0;
  std::vector<int> parent(nodes);
  while (true) {
    std::fill(parent.begin(), parent.end(), -1);
    parent[source] = source;
    std::vector<int> queue{source};
    for (size_t qi = 0; qi < queue.size() && parent[sink] < 0; ++qi) {
      int u = queue[qi];
      for (int v = 0; v < nodes; ++v)
        if (parent[v] < 0 && cap[u][v] > 0) {
          parent[v] = u;
          queue.push_back(v);
        }
    }
    if (parent[sink] < 0) break;
    Rat bottleneck = cap[parent[sink]][sink];
    for (int v = sink; v != source; v = parent[v])
      bottleneck = std::min(bottleneck, cap[parent[v]][v]);
    for (int v = sink; v != source; v = parent[v]) {
      cap[parent[v]][v] -= bottleneck;
      cap[v][parent[v]] += bottleneck;
    }
    flow += bottleneck;
  }
  return flow == 1;
}

}  // namespace detail

/// True iff some coupling of the margins puts zero mass on every forbidden
/// cell. Decided exactly in rational arithmetic.
inline bool feasible(const CouplingSystem& sys) {
  if (sys.forbidden.empty()) return true;  // product coupling
  return detail::coupling_feasible_maxflow(sys);
}

}  // namespace pmask
