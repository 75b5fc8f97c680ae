#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pmask/coupling.hpp"

namespace pmask {

struct OracleScaleExceeded : std::runtime_error {
  explicit OracleScaleExceeded(size_t cells, size_t cap)
      : std::runtime_error("oracle scale exceeded: " + std::to_string(cells) + " cells > cap " +
                           std::to_string(cap)) {}
};

/// Enumerates the vertices of the coupling polytope: every basic feasible
/// solution, i.e. every spanning tree of the bipartite support grid whose
/// tree-determined flows are all nonnegative, deduplicated as points.
/// Oracle-scale only: refuses grids larger than cap cells.
inline std::vector<Coupling> enumerate_vertices(const CouplingSystem& sys, size_t cap = 16) {
  if (!sys.forbidden.empty())
    throw std::invalid_argument("enumerate_vertices expects an unconstrained coupling system");
  const auto& rows = sys.row_margins.entries();
  const auto& cols = sys.col_margins.entries();
  const int m = static_cast<int>(rows.size());
  const int n = static_cast<int>(cols.size());
  const size_t cells = static_cast<size_t>(m) * n;
  if (cells > cap) throw OracleScaleExceeded(cells, cap);

  const int k = m + n - 1;  // basis size
  std::vector<int> chosen;
  std::vector<Coupling> out;

  // Union-find over the m+n nodes for the acyclicity check of a cell subset.
  auto acyclic_spanning = [&](const std::vector<int>& set) {
    std::vector<int> uf(m + n);
    for (int i = 0; i < m + n; ++i) uf[i] = i;
    auto find = [&](int x) {
      while (uf[x] != x) x = uf[x] = uf[uf[x]];
      return x;
    };
    for (int cell : set) {
      int a = find(cell / n), b = find(m + cell % n);
      if (a == b) return false;
      uf[a] = b;
    }
    return true;  // k edges + acyclic over m+n nodes => spanning tree
  };

  // Solves the flows on a spanning tree by leaf elimination; nullopt when a
  // flow would be negative.
  auto solve_tree = [&](const std::vector<int>& set) -> std::vector<std::pair<int, Rat>> {
    std::vector<Rat> mass(m + n);
    for (int i = 0; i < m; ++i) mass[i] = rows[i].second;
    for (int j = 0; j < n; ++j) mass[m + j] = cols[j].second;
    std::vector<std::vector<int>> adj(m + n);
    for (size_t e = 0; e < set.size(); ++e) {
      adj[set[e] / n].push_back(static_cast<int>(e));
      adj[m + set[e] % n].push_back(static_cast<int>(e));
    }
    std::vector<char> edge_done(set.size(), 0), node_done(m + n, 0);
    std::vector<std::pair<int, Rat>> weights;
    for (size_t step = 0; step < set.size(); ++step) {
      int leaf = -1, edge = -1;
      for (int node = 0; node < m + n && leaf < 0; ++node) {
        if (node_done[node]) continue;
        int live = 0, last = -1;
        for (int e : adj[node])
          if (!edge_done[e]) {
            ++live;
            last = e;
          }
        if (live == 1) {
          leaf = node;
          edge = last;
        }
      }
      Rat w = mass[leaf];
      if (w < 0) return {};
      int other = (leaf < m) ? m + set[edge] % n : set[edge] / n;
      mass[other] -= w;
      mass[leaf] = 0;
      node_done[leaf] = 1;
      edge_done[edge] = 1;
      weights.emplace_back(set[edge], w);
    }
    for (int node = 0; node < m + n; ++node)
      if (mass[node] != 0 && !node_done[node]) return {};
    return weights;
  };

  std::vector<Coupling> found;
  std::function<void(int)> recurse = [&](int next) {
    if (static_cast<int>(chosen.size()) == k) {
      if (!acyclic_spanning(chosen)) return;
      auto weights = solve_tree(chosen);
      if (weights.empty()) return;
      Coupling c;
      for (auto& [cell, w] : weights)
        if (w > 0) c.cells.push_back({rows[cell / n].first, cols[cell % n].first, w});
      std::sort(c.cells.begin(), c.cells.end(), [](const Coupling::Cell& a, const Coupling::Cell& b) {
        return std::make_pair(a.row, a.col) < std::make_pair(b.row, b.col);
      });
      for (auto& prev : found)
        if (prev == c) return;
      found.push_back(std::move(c));
      return;
    }
    if (next >= static_cast<int>(cells)) return;
    if (static_cast<int>(cells) - next < k - static_cast<int>(chosen.size())) return;
    chosen.push_back(next);
    recurse(next + 1);
    chosen.pop_back();
    recurse(next + 1);
  };
  recurse(0);
  return found;
}

}  // namespace pmask
