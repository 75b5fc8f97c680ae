#pragma once

// Randomized equivalence suites cross-checking the symbolic engines against
// the explicit-game oracles. Shared by the property test runner and the
// acceptance binary. Each function returns an empty string on success or a
// description of the first divergence.

#include <map>
#include <random>
#include <sstream>
#include <string>

#include "pmask/fairness.hpp"
#include "pmask/masking.hpp"
#include "pmask/measure.hpp"
#include "pmask/oracle.hpp"

namespace pmask::testutil {

inline std::string dist_key(const Dist& d) { return d.to_string(); }

inline std::string symbolic_vertex_key(const SymbolicGameGraph& g, VertexId v) {
  const auto& vx = g.vertex(v);
  std::ostringstream key;
  key << static_cast<int>(vx.kind) << '|' << vx.s << '|' << vx.t;
  if (vx.kind == VertexKind::Verifier)
    key << '|' << vx.action << '^' << int(vx.side) << '|' << dist_key(g.dist(vx.pending));
  if (vx.kind == VertexKind::Prob)
    key << '|' << dist_key(g.dist(vx.mu)) << '|' << dist_key(g.dist(vx.mu_prime));
  return key.str();
}

inline std::string explicit_vertex_key(const oracle::ExplicitGame& g, VertexId v) {
  const auto& vx = g.vertices[v];
  std::ostringstream key;
  key << static_cast<int>(vx.kind) << '|' << vx.s << '|' << vx.t;
  if (vx.kind == VertexKind::Verifier)
    key << '|' << vx.action << '^' << int(vx.side) << '|' << dist_key(g.dists[vx.pending]);
  if (vx.kind == VertexKind::Prob)
    key << '|' << dist_key(g.dists[vx.mu]) << '|' << dist_key(g.dists[vx.mu_prime]);
  return key.str();
}

/// Levels of the U sets vs. the W sets of the explicit vertex-coupling game.
/// Refuter and Verifier vertices correspond one to one and must match
/// exactly; a symbolic probabilistic vertex abstracts all its vertex
/// couplings and its level equals the maximum of their W levels.
inline std::string check_u_vs_w(const SymbolicGameGraph& sg, const oracle::ExplicitGame& eg) {
  ULevels u = compute_u(sg);
  std::vector<int32_t> w = compute_w(eg);

  std::map<std::string, int32_t> explicit_level;  // P: max over couplings
  for (VertexId v = 0; v < static_cast<VertexId>(eg.size()); ++v) {
    std::string key = explicit_vertex_key(eg, v);
    auto [it, fresh] = explicit_level.emplace(key, w[v]);
    if (!fresh) it->second = std::max(it->second, w[v]);
  }
  for (VertexId v = 0; v < static_cast<VertexId>(sg.size()); ++v) {
    std::string key = symbolic_vertex_key(sg, v);
    auto it = explicit_level.find(key);
    if (it == explicit_level.end()) return "symbolic vertex missing from explicit game: " + key;
    if (u.level[v] != it->second) {
      std::ostringstream msg;
      msg << "level mismatch at " << key << ": U=" << u.level[v] << " W=" << it->second;
      return msg.str();
    }
  }
  if (explicit_level.size() != 0) {
    // reverse containment: every explicit class has a symbolic twin
    std::map<std::string, bool> seen;
    for (VertexId v = 0; v < static_cast<VertexId>(sg.size()); ++v) seen[symbolic_vertex_key(sg, v)] = true;
    for (auto& [key, lvl] : explicit_level)
      if (!seen.count(key)) return "explicit vertex class missing from symbolic graph: " + key;
  }
  return "";
}

struct GameEquivalenceOutcome {
  int instances = 0;
  int with_fault = 0;
  int asf_count = 0;
  int value_checks = 0;
  std::string failure;
};

/// Runs (a) U=W levels, (b) decide_asf vs fair_reach_check, (c) symbolic
/// value iteration vs explicit Bellman fixpoint, over seeded random pairs.
inline GameEquivalenceOutcome run_game_equivalence(uint64_t seed, int count) {
  GameEquivalenceOutcome out;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    ++out.instances;
    oracle::RandomPtsConfig nom_cfg;
    oracle::RandomPtsConfig imp_cfg;
    imp_cfg.with_fault = (i % 3) != 0;
    Pts nominal = oracle::random_pts(rng, nom_cfg);
    Pts impl = oracle::random_pts(rng, imp_cfg);
    if (impl.has_faults()) ++out.with_fault;

    SymbolicGameGraph sg = build(nominal, impl);
    oracle::ExplicitGame eg = oracle::build_explicit(nominal, impl);

    std::string msg = check_u_vs_w(sg, eg);
    if (!msg.empty()) {
      out.failure = "instance " + std::to_string(i) + " (levels): " + msg;
      return out;
    }

    bool asf = decide_asf(sg).asf;
    bool asf_oracle = oracle::fair_reach_check(eg);
    if (asf != asf_oracle) {
      out.failure = "instance " + std::to_string(i) + ": decide_asf=" + std::to_string(asf) +
                    " explicit fair reach=" + std::to_string(asf_oracle);
      return out;
    }
    if (!asf) continue;
    ++out.asf_count;

    MeasureConfig cfg;
    cfg.epsilon = 1e-12;
    cfg.max_iters = 5'000'000;
    switch (i % 3) {
      case 0: cfg.milestones = {{"a0", 2}}; break;
      case 1: cfg.milestones = {{"a0", 2}, {"f0", 2}}; break;
      default: cfg.milestones = {{"a1", 2}}; break;
    }
    MeasureOutcome symbolic = measure(sg, cfg);
    ValueVector explicit_vv = oracle::explicit_value(eg, cfg.milestones, symbolic.u_used, 1e-12);
    double diff = std::abs(symbolic.value - explicit_vv.values[eg.v0]);
    ++out.value_checks;
    if (diff > 1e-6) {
      std::ostringstream msg2;
      msg2 << "instance " << i << ": symbolic value " << symbolic.value << " explicit "
           << explicit_vv.values[eg.v0] << " diff " << diff;
      out.failure = msg2.str();
      return out;
    }
  }
  return out;
}

struct CouplingEquivalenceOutcome {
  int instances = 0;
  int feasible_count = 0;
  std::string failure;
};

/// Runs (d) maximize vs vertex-enumeration max and (e) feasible vs the
/// dense basic-support search, over seeded random coupling systems.
inline CouplingEquivalenceOutcome run_coupling_equivalence(uint64_t seed, int count) {
  CouplingEquivalenceOutcome out;
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int i = 0; i < count; ++i) {
    ++out.instances;
    Dist rows = oracle::random_dist(rng, pick(2, 4), 4, 6);
    Dist cols = oracle::random_dist(rng, pick(2, 4), 4, 6);

    // (d) maximize against the enumeration oracle
    CouplingSystem unconstrained(rows, cols);
    std::uniform_real_distribution<double> obj_dist(-10.0, 10.0);
    std::map<std::pair<StateId, StateId>, double> obj;
    for (auto& [r, wr] : rows.entries())
      for (auto& [c, wc] : cols.entries()) obj[{r, c}] = obj_dist(rng);
    MaximizeResult got = maximize(unconstrained, [&](StateId r, StateId c) { return obj.at({r, c}); });
    double best = -1e300;
    for (const Coupling& w : enumerate_vertices(unconstrained)) {
      double acc = 0;
      for (auto& cell : w.cells) acc += rat_to_double(cell.weight) * obj.at({cell.row, cell.col});
      best = std::max(best, acc);
    }
    if (std::abs(got.value - best) > 1e-9 * std::max(1.0, std::abs(best))) {
      std::ostringstream msg;
      msg << "instance " << i << ": simplex max " << got.value << " vs enumerated max " << best;
      out.failure = msg.str();
      return out;
    }
    // the witness coupling must attain the value with exact margins
    {
      Rat row_total = 0;
      double attained = 0;
      for (auto& cell : got.argmax.cells) {
        attained += rat_to_double(cell.weight) * obj.at({cell.row, cell.col});
        row_total += cell.weight;
      }
      if (row_total != 1 || std::abs(attained - got.value) > 1e-9 * std::max(1.0, std::abs(best))) {
        out.failure = "instance " + std::to_string(i) + ": argmax coupling does not attain the optimum";
        return out;
      }
    }

    // (e) constrained feasibility against the dense basic-support oracle
    std::vector<std::pair<StateId, StateId>> forbidden;
    for (auto& [r, wr] : rows.entries())
      for (auto& [c, wc] : cols.entries())
        if (pick(0, 3) == 0) forbidden.emplace_back(r, c);
    CouplingSystem sys(rows, cols, forbidden);
    bool fast = feasible(sys);
    bool slow = oracle::feasible_bruteforce(sys);
    if (fast != slow) {
      out.failure = "instance " + std::to_string(i) + ": feasible=" + std::to_string(fast) +
                    " bruteforce=" + std::to_string(slow);
      return out;
    }
    if (fast) ++out.feasible_count;
  }
  return out;
}

}  // namespace pmask::testutil
