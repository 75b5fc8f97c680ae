#pragma once

#include <cstdint>
#include <vector>

#include "pmask/game.hpp"

namespace pmask {

/// Bitset over the dense VertexIds of one graph.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(size_t n) : bits_((n + 63) / 64, 0), size_(n) {}

  size_t universe() const { return size_; }
  bool test(VertexId v) const { return (bits_[v >> 6] >> (v & 63)) & 1; }
  void set(VertexId v) { bits_[v >> 6] |= uint64_t(1) << (v & 63); }

  size_t count() const {
    size_t c = 0;
    for (uint64_t word : bits_) c += __builtin_popcountll(word);
    return c;
  }

  bool operator==(const VertexSet& o) const { return size_ == o.size_ && bits_ == o.bits_; }

  bool subset_of(const VertexSet& o) const {
    for (size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i] & ~o.bits_[i]) return false;
    return true;
  }

  VertexSet complement() const {
    VertexSet out(size_);
    for (size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = ~bits_[i];
    if (size_ & 63) out.bits_.back() &= (uint64_t(1) << (size_ & 63)) - 1;
    return out;
  }

  VertexSet union_with(const VertexSet& o) const {
    VertexSet out = *this;
    for (size_t i = 0; i < bits_.size(); ++i) out.bits_[i] |= o.bits_[i];
    return out;
  }

  std::vector<VertexId> members() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < static_cast<VertexId>(size_); ++v)
      if (test(v)) out.push_back(v);
    return out;
  }

 private:
  std::vector<uint64_t> bits_;
  size_t size_ = 0;
};

namespace detail {

inline bool forall_pre_member(const SymbolicGameGraph& g, VertexId v, const VertexSet& c) {
  const auto& succ = g.successors(v);
  switch (g.vertex(v).kind) {
    case VertexKind::Verifier: {
      for (VertexId w : succ)
        if (!c.test(w)) return false;
      return true;
    }
    case VertexKind::Refuter:
    case VertexKind::Err: {
      for (VertexId w : succ)
        if (c.test(w)) return true;
      return false;
    }
    case VertexKind::Prob: {
      std::vector<VertexId> avoid;
      for (VertexId w : succ)
        if (c.test(w)) avoid.push_back(w);
      if (avoid.empty()) return false;
      return !feasible(eq_system(g, v, avoid));
    }
  }
  return false;
}

inline bool exists_pre_member(const SymbolicGameGraph& g, VertexId v, const VertexSet& c) {
  // For probabilistic vertices an edge exists exactly for the support-grid
  // pairs, and any single grid cell can carry positive coupling mass, so the
  // support test coincides with plain edge membership.
  for (VertexId w : g.successors(v))
    if (c.test(w)) return true;
  return false;
}

}  // namespace detail

/// One application of the universal fair predecessor operator: probabilistic
/// vertices whose equation system extended by C has no solution, Verifier
/// vertices with all successors in C, Refuter vertices with some successor
/// in C.
inline VertexSet forall_pre_f(const SymbolicGameGraph& g, const VertexSet& c) {
  VertexSet out(g.size());
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v)
    if (detail::forall_pre_member(g, v, c)) out.set(v);
  return out;
}

/// One application of the existential fair predecessor operator.
inline VertexSet exists_pre_f(const SymbolicGameGraph& g, const VertexSet& c) {
  VertexSet out(g.size());
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v)
    if (detail::exists_pre_member(g, v, c)) out.set(v);
  return out;
}

enum class PreOp { ForallF, ExistsF };

/// Least fixpoint of C -> seed ∪ op(C), computed frontier-first through the
/// reverse adjacency; terminates in at most |V| rounds.
inline VertexSet closure(const SymbolicGameGraph& g, PreOp op, const VertexSet& seed) {
  VertexSet c = seed;
  std::vector<VertexId> frontier = seed.members();
  std::vector<char> queued(g.size(), 0);
  while (!frontier.empty()) {
    std::vector<VertexId> candidates;
    for (VertexId f : frontier)
      for (VertexId p : g.predecessors(f))
        if (!c.test(p) && !queued[p]) {
          queued[p] = 1;
          candidates.push_back(p);
        }
    std::vector<VertexId> added;
    for (VertexId v : candidates) {
      queued[v] = 0;
      bool in = op == PreOp::ForallF ? detail::forall_pre_member(g, v, c) : detail::exists_pre_member(g, v, c);
      if (in) {
        c.set(v);
        added.push_back(v);
      }
    }
    frontier = std::move(added);
  }
  return c;
}

struct AsfResult {
  bool asf;
  std::vector<VertexId> unsafe_witness;  // reachable part of the exists-closure when asf is false
};

/// Almost-sure failing under fairness (memoryless strategies):
/// v0 ∈ V \ ExistsPre*_f(V \ ForallPre*_f({v_err})).
inline AsfResult decide_asf(const SymbolicGameGraph& g) {
  VertexSet err_seed(g.size());
  err_seed.set(g.err());
  VertexSet inevitable = closure(g, PreOp::ForallF, err_seed);
  VertexSet safe_core = inevitable.complement();
  VertexSet escapable = closure(g, PreOp::ExistsF, safe_core);
  AsfResult out{!escapable.test(g.v0()), {}};
  if (!out.asf) out.unsafe_witness = escapable.members();
  return out;
}

}  // namespace pmask
