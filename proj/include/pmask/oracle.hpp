#pragma once

#include <deque>
#include <random>
#include <vector>

#include "pmask/game.hpp"
#include "pmask/masking.hpp"
#include "pmask/measure.hpp"
#include "pmask/polytope.hpp"

// Brute-force reference implementations: the explicit vertex-coupling game
// restricted to polytope vertices, its W attractor levels, plain Bellman
// iteration and the fair-reachability check. Test-harness scale only.
namespace pmask::oracle {

struct ExplicitVertex {
  VertexKind kind;
  StateId s = -1, t = -1;
  ActionId action = -1;
  uint8_t side = 0;
  int pending = -1;   // Verifier: index into dists
  int mu = -1, mu_prime = -1;  // Prob margins
  int coupling = -1;           // Prob: index into couplings

  bool operator==(const ExplicitVertex& o) const {
    return kind == o.kind && s == o.s && t == o.t && action == o.action && side == o.side &&
           pending == o.pending && mu == o.mu && mu_prime == o.mu_prime && coupling == o.coupling;
  }
};

class ExplicitGame {
 public:
  std::vector<ExplicitVertex> vertices;
  std::vector<std::vector<VertexId>> edges, redges;
  std::vector<Dist> dists;
  std::vector<Coupling> couplings;
  // per probabilistic vertex: (successor, probability) with the coupling mass
  std::vector<std::vector<std::pair<VertexId, Rat>>> delta;
  VertexId v0 = -1, err = -1;
  std::vector<std::string> action_names;
  std::vector<bool> is_fault;

  size_t size() const { return vertices.size(); }

  int action_id(const std::string& name) const {
    for (size_t i = 0; i < action_names.size(); ++i)
      if (action_names[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline ExplicitGame build_explicit(const Pts& nominal, const Pts& impl, size_t cap = 16) {
  ExplicitGame g;
  pmask::detail::JointActions joint = pmask::detail::make_joint_actions(nominal, impl);
  g.action_names = joint.names;
  g.is_fault = joint.fault;

  auto intern_dist = [&](const Dist& d) {
    for (size_t i = 0; i < g.dists.size(); ++i)
      if (g.dists[i] == d) return static_cast<int>(i);
    g.dists.push_back(d);
    return static_cast<int>(g.dists.size() - 1);
  };
  auto intern_coupling = [&](const Coupling& c) {
    for (size_t i = 0; i < g.couplings.size(); ++i)
      if (g.couplings[i] == c) return static_cast<int>(i);
    g.couplings.push_back(c);
    return static_cast<int>(g.couplings.size() - 1);
  };

  std::deque<VertexId> work;
  auto intern_vertex = [&](const ExplicitVertex& v) {
    for (size_t i = 0; i < g.vertices.size(); ++i)
      if (g.vertices[i] == v) return static_cast<VertexId>(i);
    g.vertices.push_back(v);
    g.edges.emplace_back();
    g.delta.emplace_back();
    work.push_back(static_cast<VertexId>(g.vertices.size() - 1));
    return static_cast<VertexId>(g.vertices.size() - 1);
  };

  ExplicitVertex errv{VertexKind::Err};
  g.v0 = intern_vertex(ExplicitVertex{VertexKind::Refuter, nominal.initial(), impl.initial()});
  g.err = intern_vertex(errv);

  while (!work.empty()) {
    VertexId id = work.front();
    work.pop_front();
    ExplicitVertex v = g.vertices[id];
    std::vector<VertexId> succ;
    auto add = [&](const ExplicitVertex& target) {
      VertexId tid = intern_vertex(target);
      for (VertexId e : succ)
        if (e == tid) return tid;
      succ.push_back(tid);
      return tid;
    };
    auto add_prob_vertices = [&](StateId s, StateId t, const Dist& mu, const Dist& mu_prime) {
      int mu_id = intern_dist(mu), mu_prime_id = intern_dist(mu_prime);
      for (const Coupling& w : enumerate_vertices(CouplingSystem(mu, mu_prime), cap)) {
        ExplicitVertex p{VertexKind::Prob, s, t};
        p.mu = mu_id;
        p.mu_prime = mu_prime_id;
        p.coupling = intern_coupling(w);
        add(p);
      }
    };

    switch (v.kind) {
      case VertexKind::Err:
        add(errv);
        break;
      case VertexKind::Refuter: {
        for (auto& [a, mu] : nominal.transitions_from(v.s)) {
          ExplicitVertex w{VertexKind::Verifier, v.s, v.t};
          w.action = joint.nom_map[a];
          w.side = 1;
          w.pending = intern_dist(*mu);
          add(w);
        }
        for (auto& [a, mu] : impl.transitions_from(v.t)) {
          ExplicitVertex w{VertexKind::Verifier, v.s, v.t};
          w.action = joint.imp_map[a];
          w.side = 2;
          w.pending = intern_dist(*mu);
          add(w);
        }
        break;
      }
      case VertexKind::Verifier: {
        if (v.side == 1) {
          for (auto& [a, mu_prime] : impl.transitions_from(v.t))
            if (joint.imp_map[a] == v.action) add_prob_vertices(v.s, v.t, g.dists[v.pending], *mu_prime);
        } else if (!g.is_fault[v.action]) {
          for (auto& [a, mu] : nominal.transitions_from(v.s))
            if (joint.nom_map[a] == v.action) add_prob_vertices(v.s, v.t, *mu, g.dists[v.pending]);
        } else {
          add_prob_vertices(v.s, v.t, Dist::dirac(v.s), g.dists[v.pending]);
        }
        if (succ.empty()) add(errv);
        break;
      }
      case VertexKind::Prob: {
        const Coupling& w = g.couplings[v.coupling];
        for (auto& cell : w.cells) {
          VertexId r = add(ExplicitVertex{VertexKind::Refuter, cell.row, cell.col});
          g.delta[id].emplace_back(r, cell.weight);
        }
        break;
      }
    }
    g.edges[id] = std::move(succ);
  }

  g.redges.assign(g.size(), {});
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v)
    for (VertexId w : g.edges[v]) g.redges[w].push_back(v);
  return g;
}

/// W attractor levels on the explicit game, mirroring the U computation:
/// Refuter and probabilistic vertices enter one step after some successor
/// (delta puts positive mass on every stored successor), Verifier vertices
/// one step after all of them.
inline std::vector<int32_t> compute_w(const ExplicitGame& g) {
  std::vector<int32_t> level(g.size(), kLevelInf);
  level[g.err] = 0;
  std::vector<VertexId> frontier{g.err};
  std::vector<char> queued(g.size(), 0);
  for (int32_t round = 1; !frontier.empty(); ++round) {
    std::vector<VertexId> candidates;
    for (VertexId f : frontier)
      for (VertexId p : g.redges[f])
        if (level[p] == kLevelInf && !queued[p]) {
          queued[p] = 1;
          candidates.push_back(p);
        }
    std::vector<VertexId> added;
    for (VertexId v : candidates) {
      queued[v] = 0;
      const auto& succ = g.edges[v];
      bool in = false;
      if (g.vertices[v].kind == VertexKind::Verifier) {
        in = true;
        for (VertexId w : succ) in &= level[w] < round;
      } else {
        for (VertexId w : succ) in |= level[w] < round;
      }
      if (in) {
        level[v] = round;
        added.push_back(v);
      }
    }
    frontier = std::move(added);
  }
  return level;
}

inline ResolvedMilestones normalize_milestones(const ExplicitGame& g,
                                               const std::vector<std::pair<std::string, int>>& named) {
  ResolvedMilestones out;
  auto push = [&](ActionId a, int side) {
    for (auto& e : out)
      if (e.first == a && e.second == side) return;
    out.emplace_back(a, side);
  };
  for (auto& [name, side] : named) {
    int id = g.action_id(name);
    if (id < 0) continue;
    if (g.is_fault[id]) {
      if (side == 2) push(id, 2);
    } else {
      push(id, 1);
      push(id, 2);
    }
  }
  return out;
}

/// Plain gfp-from-above Bellman iteration on the explicit game: expectations
/// under delta at probabilistic vertices, max at Verifier, min at Refuter.
inline ValueVector explicit_value(const ExplicitGame& g, const std::vector<std::pair<std::string, int>>& named,
                                  double u, double eps, long long max_iters = 1'000'000) {
  ResolvedMilestones milestones = normalize_milestones(g, named);
  std::vector<int> rew(g.size(), 0);
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v) {
    const auto& vx = g.vertices[v];
    if (vx.kind != VertexKind::Verifier) continue;
    for (auto& [a, side] : milestones)
      if (a == vx.action && side == vx.side) rew[v] = 1;
  }
  std::vector<std::vector<std::pair<VertexId, double>>> delta(g.size());
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v)
    for (auto& [w, p] : g.delta[v]) delta[v].emplace_back(w, rat_to_double(p));

  ValueVector vv;
  vv.u_used = u;
  std::vector<double> cur(g.size(), u), next(g.size());
  cur[g.err] = 0;
  for (long long it = 1; it <= max_iters; ++it) {
    for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v) {
      const auto& vx = g.vertices[v];
      const auto& succ = g.edges[v];
      switch (vx.kind) {
        case VertexKind::Err:
          next[v] = 0;
          break;
        case VertexKind::Verifier: {
          double best = cur[succ[0]];
          for (size_t i = 1; i < succ.size(); ++i) best = std::max(best, cur[succ[i]]);
          next[v] = std::min(u, rew[v] + best);
          break;
        }
        case VertexKind::Refuter: {
          double best = cur[succ[0]];
          for (size_t i = 1; i < succ.size(); ++i) best = std::min(best, cur[succ[i]]);
          next[v] = std::min(u, best);
          break;
        }
        case VertexKind::Prob: {
          double acc = 0;
          for (auto& [w, p] : delta[v]) acc += p * cur[w];
          next[v] = std::min(u, acc);
          break;
        }
      }
    }
    double residual = 0;
    for (size_t v = 0; v < cur.size(); ++v)
      residual = std::max(residual, std::abs(next[v] - cur[v]) / std::max(1.0, std::abs(cur[v])));
    cur.swap(next);
    vv.iters = it;
    vv.residual = residual;
    if (residual < eps) {
      vv.values = std::move(cur);
      for (size_t v = 0; v < vv.values.size(); ++v)
        if (v != static_cast<size_t>(g.err) && u - vv.values[v] <= eps * std::max(1.0, u))
          vv.clamp_active = true;
      return vv;
    }
  }
  throw NoConvergence(vv.residual, vv.iters);
}

namespace detail {

inline std::vector<char> explicit_closure(const ExplicitGame& g, bool universal, std::vector<char> seed) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v) {
      if (seed[v]) continue;
      const auto& succ = g.edges[v];
      bool in;
      if (universal && g.vertices[v].kind == VertexKind::Verifier) {
        in = true;
        for (VertexId w : succ) in &= seed[w] != 0;
      } else {
        in = false;
        for (VertexId w : succ) in |= seed[w] != 0;
      }
      if (in) {
        seed[v] = 1;
        changed = true;
      }
    }
  }
  return seed;
}

}  // namespace detail

/// Fair almost-sure reachability of the error vertex on the explicit game:
/// v0 in V \ ExistsPre*_f(V \ ForallPre*_f({err})).
inline bool fair_reach_check(const ExplicitGame& g) {
  std::vector<char> err_seed(g.size(), 0);
  err_seed[g.err] = 1;
  std::vector<char> inevitable = detail::explicit_closure(g, true, std::move(err_seed));
  std::vector<char> safe(g.size());
  for (size_t v = 0; v < g.size(); ++v) safe[v] = !inevitable[v];
  std::vector<char> escapable = detail::explicit_closure(g, false, std::move(safe));
  return !escapable[g.v0];
}

/// Independent feasibility oracle: enumerate the vertices of the FULL
/// coupling polytope and test the zero-sum equation over the forbidden
/// cells directly (a nonnegative point zeroing their sum exists iff a
/// polytope vertex does, faces of a polytope having polytope vertices).
inline bool feasible_bruteforce(const CouplingSystem& sys, size_t cap = 16) {
  CouplingSystem unconstrained(sys.row_margins, sys.col_margins);
  for (const Coupling& w : enumerate_vertices(unconstrained, cap)) {
    Rat forbidden_mass = 0;
    for (auto& cell : w.cells)
      if (sys.is_forbidden(cell.row, cell.col)) forbidden_mass += cell.weight;
    if (forbidden_mass == 0) return true;
  }
  return false;
}

/// Seeded generator of small random PTSs for the equivalence suites:
/// 2-4 states, up to 3 shared actions plus at most one fault label on the
/// implementation side, supports of size up to 3, denominators up to 6.
struct RandomPtsConfig {
  int min_states = 2, max_states = 4;
  int max_actions = 3;
  int max_support = 3;
  int max_denominator = 6;
  bool with_fault = false;
};

inline Dist random_dist(std::mt19937_64& rng, int n_states, int max_support, int max_denominator) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int support = pick(1, std::min(max_support, n_states));
  std::vector<StateId> targets;
  while (static_cast<int>(targets.size()) < support) {
    StateId t = pick(0, n_states - 1);
    bool dup = false;
    for (StateId u : targets) dup |= u == t;
    if (!dup) targets.push_back(t);
  }
  int den = pick(support, max_denominator);
  // composition of den into `support` positive parts
  std::vector<int> cuts{0, den};
  while (static_cast<int>(cuts.size()) < support + 1) {
    int c = pick(1, den - 1);
    bool dup = false;
    for (int x : cuts) dup |= x == c;
    if (!dup) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<Dist::Entry> entries;
  for (int k = 0; k < support; ++k) entries.emplace_back(targets[k], Rat(cuts[k + 1] - cuts[k], den));
  return Dist::from_pairs(std::move(entries));
}

inline Pts random_pts(std::mt19937_64& rng, const RandomPtsConfig& cfg) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int n = pick(cfg.min_states, cfg.max_states);
  int actions = pick(1, cfg.max_actions);
  Pts pts(n, 0);
  std::vector<ActionId> ids;
  for (int a = 0; a < actions; ++a) ids.push_back(pts.intern_action("a" + std::to_string(a)));
  ActionId fault = -1;
  if (cfg.with_fault) {
    fault = pts.intern_action("f0");
    pts.mark_fault(fault);
  }
  for (StateId s = 0; s < n; ++s) {
    int outgoing = pick(1, 2);
    for (int k = 0; k < outgoing; ++k) {
      ActionId a = ids[pick(0, actions - 1)];
      pts.add_transition(s, a, random_dist(rng, n, cfg.max_support, cfg.max_denominator));
    }
    if (fault >= 0 && pick(0, 2) == 0)
      pts.add_transition(s, fault, random_dist(rng, n, cfg.max_support, cfg.max_denominator));
  }
  return pts;
}

}  // namespace pmask::oracle
