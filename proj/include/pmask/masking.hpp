#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "pmask/game.hpp"

namespace pmask {

constexpr int32_t kLevelInf = std::numeric_limits<int32_t>::max();

/// Least level i with v in U^i; kLevelInf when v is never collected.
struct ULevels {
  std::vector<int32_t> level;
  bool in_u(VertexId v) const { return level[v] != kLevelInf; }
};

/// Fixpoint of the U sets on the symbolic graph. The stage sets are
/// cumulative (monotonicity follows from the clauses; feasibility is
/// antitone in the forbidden cells), so membership tests read "level < i".
inline ULevels compute_u(const SymbolicGameGraph& g) {
  ULevels out;
  out.level.assign(g.size(), kLevelInf);
  out.level[g.err()] = 0;

  std::vector<VertexId> frontier{g.err()};
  std::vector<char> queued(g.size(), 0);
  for (int32_t round = 1; !frontier.empty(); ++round) {
    std::vector<VertexId> candidates;
    for (VertexId f : frontier)
      for (VertexId p : g.predecessors(f))
        if (out.level[p] == kLevelInf && !queued[p]) {
          queued[p] = 1;
          candidates.push_back(p);
        }
    std::vector<VertexId> added;
    for (VertexId v : candidates) {
      queued[v] = 0;
      const auto& succ = g.successors(v);
      bool in = false;
      switch (g.vertex(v).kind) {
        case VertexKind::Err:
          break;
        case VertexKind::Refuter: {
          for (VertexId w : succ) in |= out.level[w] < round;
          break;
        }
        case VertexKind::Verifier: {
          in = true;
          for (VertexId w : succ) in &= out.level[w] < round;
          break;
        }
        case VertexKind::Prob: {
          std::vector<VertexId> avoid;
          for (VertexId w : succ)
            if (out.level[w] < round) avoid.push_back(w);
          if (!avoid.empty()) in = !feasible(eq_system(g, v, avoid));
          break;
        }
      }
      if (in) {
        out.level[v] = round;
        added.push_back(v);
      }
    }
    frontier = std::move(added);
  }
  return out;
}

struct MaskingResult {
  bool masking;
  ULevels levels;
  std::vector<std::pair<StateId, StateId>> relation;  // witness when masking holds
  std::vector<VertexId> trace;                        // refutation when it does not
};

namespace detail {

/// Post-verifies an extracted candidate relation against the three clauses
/// of the masking simulation definition, with couplings restricted to M.
inline bool verify_masking_relation(const Pts& nominal, const Pts& impl, const SymbolicGameGraph& g,
                                    const std::vector<std::pair<StateId, StateId>>& relation) {
  auto in_relation = [&](StateId u, StateId u2) {
    for (auto& [a, b] : relation)
      if (a == u && b == u2) return true;
    return false;
  };
  bool initial_in = in_relation(nominal.initial(), impl.initial());
  if (!initial_in) return false;

  auto respecting = [&](const Dist& mu, const Dist& mu_prime) {
    std::vector<std::pair<StateId, StateId>> forbidden;
    for (auto& [u, wu] : mu.entries())
      for (auto& [u2, wu2] : mu_prime.entries())
        if (!in_relation(u, u2)) forbidden.emplace_back(u, u2);
    return feasible(CouplingSystem(mu, mu_prime, std::move(forbidden)));
  };

  for (auto& [s, t] : relation) {
    for (auto& [a, mu] : nominal.transitions_from(s)) {
      bool matched = false;
      for (auto& [a2, mu_prime] : impl.transitions_from(t)) {
        if (matched || impl.action_name(a2) != nominal.action_name(a) || impl.is_fault(a2)) continue;
        matched = respecting(*mu, *mu_prime);
      }
      if (!matched) return false;
    }
    for (auto& [a2, mu_prime] : impl.transitions_from(t)) {
      if (impl.is_fault(a2)) {
        if (!respecting(Dist::dirac(s), *mu_prime)) return false;
        continue;
      }
      bool matched = false;
      for (auto& [a, mu] : nominal.transitions_from(s)) {
        if (matched || nominal.action_name(a) != impl.action_name(a2)) continue;
        matched = respecting(*mu, *mu_prime);
      }
      if (!matched) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Decides the masking simulation on an already-built graph. The verdict is
/// level(v0) = inf; the positive witness is the relation of all reachable
/// infinite-level Refuter pairs, re-verified against the simulation clauses;
/// the negative witness is a level-descending path from v0 to the error
/// vertex.
inline MaskingResult decide_masking(const Pts& nominal, const Pts& impl, const SymbolicGameGraph& g) {
  MaskingResult out{false, compute_u(g), {}, {}};
  out.masking = !out.levels.in_u(g.v0());

  if (out.masking) {
    for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v) {
      const auto& vx = g.vertex(v);
      if (vx.kind == VertexKind::Refuter && !out.levels.in_u(v)) out.relation.emplace_back(vx.s, vx.t);
    }
    if (!detail::verify_masking_relation(nominal, impl, g, out.relation))
      throw std::logic_error("internal error: extracted masking relation fails the simulation clauses");
  } else {
    VertexId current = g.v0();
    out.trace.push_back(current);
    while (current != g.err()) {
      int32_t want = out.levels.level[current] - 1;
      VertexId next = -1;
      for (VertexId w : g.successors(current))
        if (out.levels.level[w] == want && next < 0) next = w;
      if (next < 0) throw std::logic_error("internal error: refutation trace cannot descend");
      out.trace.push_back(next);
      current = next;
    }
  }
  return out;
}

inline MaskingResult decide_masking(const Pts& nominal, const Pts& impl) {
  SymbolicGameGraph g = build(nominal, impl);
  return decide_masking(nominal, impl, g);
}

}  // namespace pmask
