#pragma once

#include <deque>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "pmask/coupling.hpp"
#include "pmask/pts.hpp"

namespace pmask {

using VertexId = int32_t;
using DistId = int32_t;

enum class VertexKind : uint8_t { Refuter, Verifier, Prob, Err };

/// A vertex of the symbolic masking game graph. Refuter vertices carry the
/// current state pair; Verifier vertices additionally the action challenged
/// by the Refuter, which side it was played on and the pending distribution;
/// probabilistic vertices both margin distributions (the coupling itself
/// stays symbolic).
struct SymbolicVertex {
  VertexKind kind;
  StateId s = -1, t = -1;   // nominal / implementation state
  ActionId action = -1;     // Verifier only, joint action id
  uint8_t side = 0;         // Verifier only, 1 = nominal move, 2 = implementation move
  DistId pending = -1;      // Verifier only
  DistId mu = -1, mu_prime = -1;  // Prob only

  bool operator==(const SymbolicVertex& o) const {
    return kind == o.kind && s == o.s && t == o.t && action == o.action && side == o.side &&
           pending == o.pending && mu == o.mu && mu_prime == o.mu_prime;
  }
};

struct GraphStats {
  size_t refuter = 0, verifier = 0, prob = 0, err = 0, edges = 0;
  bool operator==(const GraphStats& o) const {
    return refuter == o.refuter && verifier == o.verifier && prob == o.prob && err == o.err && edges == o.edges;
  }
};

/// Finite symbolic game graph for a nominal/implementation PTS pair,
/// restricted to the vertices reachable from the initial Refuter vertex.
class SymbolicGameGraph {
 public:
  const std::vector<SymbolicVertex>& vertices() const { return vertices_; }
  size_t size() const { return vertices_.size(); }
  const SymbolicVertex& vertex(VertexId v) const { return vertices_[v]; }
  VertexId v0() const { return v0_; }
  VertexId err() const { return err_; }

  const std::vector<VertexId>& successors(VertexId v) const { return edges_[v]; }
  const std::vector<VertexId>& predecessors(VertexId v) const { return redges_[v]; }
  size_t edge_count() const { return edge_count_; }

  const Dist& dist(DistId d) const { return dists_[d]; }

  // Joint action table (nominal and implementation actions matched by name).
  const std::vector<std::string>& action_names() const { return action_names_; }
  const std::string& action_name(ActionId a) const { return action_names_[a]; }
  bool is_fault(ActionId a) const { return is_fault_[a]; }
  int action_id(const std::string& name) const {
    for (size_t i = 0; i < action_names_.size(); ++i)
      if (action_names_[i] == name) return static_cast<int>(i);
    return -1;
  }

  /// Refuter-vertex id for a state pair, or -1 when unreachable.
  VertexId refuter_vertex(StateId s, StateId t) const {
    auto it = refuter_index_.find(key(s, t));
    return it == refuter_index_.end() ? -1 : it->second;
  }

  GraphStats stats() const {
    GraphStats st;
    for (auto& v : vertices_) switch (v.kind) {
        case VertexKind::Refuter: ++st.refuter; break;
        case VertexKind::Verifier: ++st.verifier; break;
        case VertexKind::Prob: ++st.prob; break;
        case VertexKind::Err: ++st.err; break;
      }
    st.edges = edge_count_;
    return st;
  }

  std::string describe(VertexId id, const Pts* nom = nullptr, const Pts* imp = nullptr) const {
    const auto& v = vertices_[id];
    auto nlabel = [&](StateId s) { return nom ? nom->label(s) : "s" + std::to_string(s); };
    auto ilabel = [&](StateId t) { return imp ? imp->label(t) : "t" + std::to_string(t); };
    switch (v.kind) {
      case VertexKind::Err:
        return "err";
      case VertexKind::Refuter:
        return "R " + nlabel(v.s) + " " + ilabel(v.t);
      case VertexKind::Verifier:
        return "V " + nlabel(v.s) + " " + ilabel(v.t) + " " + action_names_[v.action] + "^" +
               std::to_string(int(v.side));
      case VertexKind::Prob:
        return "P " + nlabel(v.s) + " " + ilabel(v.t) + " mu=" + dists_[v.mu].to_string() +
               " mu'=" + dists_[v.mu_prime].to_string();
    }
    return "?";
  }

 private:
  friend SymbolicGameGraph build(const Pts&, const Pts&);

  static int64_t key(StateId s, StateId t) { return (static_cast<int64_t>(s) << 32) | static_cast<uint32_t>(t); }

  DistId intern_dist(const Dist& d) {
    size_t h = d.hash();
    auto [lo, hi] = dist_index_.equal_range(h);
    for (auto it = lo; it != hi; ++it)
      if (dists_[it->second] == d) return it->second;
    DistId id = static_cast<DistId>(dists_.size());
    dists_.push_back(d);
    dist_index_.emplace(h, id);
    return id;
  }

  VertexId intern_vertex(const SymbolicVertex& v, std::deque<VertexId>& work) {
    size_t h = vertex_hash(v);
    auto [lo, hi] = vertex_index_.equal_range(h);
    for (auto it = lo; it != hi; ++it)
      if (vertices_[it->second] == v) return it->second;
    VertexId id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back(v);
    edges_.emplace_back();
    vertex_index_.emplace(h, id);
    if (v.kind == VertexKind::Refuter) refuter_index_.emplace(key(v.s, v.t), id);
    work.push_back(id);
    return id;
  }

  static size_t vertex_hash(const SymbolicVertex& v) {
    size_t h = static_cast<size_t>(v.kind);
    auto mix = [&](int64_t x) { h ^= std::hash<int64_t>{}(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
    mix(v.s);
    mix(v.t);
    mix(v.action);
    mix(v.side);
    mix(v.pending);
    mix(v.mu);
    mix(v.mu_prime);
    return h;
  }

  std::vector<SymbolicVertex> vertices_;
  std::vector<std::vector<VertexId>> edges_;
  std::vector<std::vector<VertexId>> redges_;
  size_t edge_count_ = 0;
  VertexId v0_ = -1, err_ = -1;
  std::vector<Dist> dists_;
  std::unordered_multimap<size_t, DistId> dist_index_;
  std::unordered_multimap<size_t, VertexId> vertex_index_;
  std::unordered_map<int64_t, VertexId> refuter_index_;
  std::vector<std::string> action_names_;
  std::vector<bool> is_fault_;
};

namespace detail {

/// Joint action table for a nominal/implementation pair: actions matched by
/// name, fault flags taken from the implementation. Rejects a nominal model
/// that uses a fault label (F and Sigma are disjoint).
struct JointActions {
  std::vector<std::string> names;
  std::vector<bool> fault;
  std::vector<ActionId> nom_map, imp_map;
};

inline JointActions make_joint_actions(const Pts& nominal, const Pts& impl) {
  JointActions j;
  std::map<std::string, ActionId> index;
  auto joint_id = [&](const std::string& name, bool fault) {
    auto it = index.find(name);
    if (it != index.end()) {
      if (fault) j.fault[it->second] = true;
      return it->second;
    }
    ActionId id = static_cast<ActionId>(j.names.size());
    j.names.push_back(name);
    j.fault.push_back(fault);
    index.emplace(name, id);
    return id;
  };
  j.nom_map.resize(nominal.action_names().size());
  j.imp_map.resize(impl.action_names().size());
  for (size_t a = 0; a < nominal.action_names().size(); ++a)
    j.nom_map[a] = joint_id(nominal.action_names()[a], false);
  for (size_t a = 0; a < impl.action_names().size(); ++a)
    j.imp_map[a] = joint_id(impl.action_names()[a], impl.is_fault(static_cast<ActionId>(a)));
  for (size_t a = 0; a < nominal.action_names().size(); ++a) {
    if (nominal.is_fault(static_cast<ActionId>(a)))
      throw std::invalid_argument("nominal model uses fault label " + nominal.action_names()[a]);
    if (j.fault[j.nom_map[a]])
      throw std::invalid_argument("nominal model uses the implementation fault label " +
                                  nominal.action_names()[a]);
  }
  return j;
}

}  // namespace detail

/// Builds the symbolic game graph for nominal A and implementation A'.
/// Actions are matched by name across the two systems; the implementation's
/// fault labels form F. The nominal model must not use a fault label.
inline SymbolicGameGraph build(const Pts& nominal, const Pts& impl) {
  SymbolicGameGraph g;

  detail::JointActions joint = detail::make_joint_actions(nominal, impl);
  g.action_names_ = joint.names;
  g.is_fault_ = joint.fault;
  const std::vector<ActionId>& nom_map = joint.nom_map;
  const std::vector<ActionId>& imp_map = joint.imp_map;

  std::deque<VertexId> work;
  SymbolicVertex root{VertexKind::Refuter, nominal.initial(), impl.initial()};
  g.v0_ = g.intern_vertex(root, work);
  SymbolicVertex errv{VertexKind::Err};
  g.err_ = g.intern_vertex(errv, work);

  while (!work.empty()) {
    VertexId id = work.front();
    work.pop_front();
    SymbolicVertex v = g.vertices_[id];  // copy: vertices_ may reallocate
    std::vector<VertexId> succ;
    auto add = [&](const SymbolicVertex& target) {
      VertexId tid = g.intern_vertex(target, work);
      for (VertexId existing : succ)
        if (existing == tid) return;
      succ.push_back(tid);
    };

    switch (v.kind) {
      case VertexKind::Err:
        add(errv);  // rule (err): the error vertex loops
        break;
      case VertexKind::Refuter: {
        for (auto& [a, mu] : nominal.transitions_from(v.s)) {
          SymbolicVertex w{VertexKind::Verifier, v.s, v.t};
          w.action = nom_map[a];
          w.side = 1;
          w.pending = g.intern_dist(*mu);
          add(w);
        }
        for (auto& [a, mu] : impl.transitions_from(v.t)) {
          SymbolicVertex w{VertexKind::Verifier, v.s, v.t};
          w.action = imp_map[a];
          w.side = 2;
          w.pending = g.intern_dist(*mu);
          add(w);
        }
        break;
      }
      case VertexKind::Verifier: {
        if (v.side == 1) {
          for (auto& [a, mu_prime] : impl.transitions_from(v.t))
            if (imp_map[a] == v.action) {
              SymbolicVertex w{VertexKind::Prob, v.s, v.t};
              w.mu = v.pending;
              w.mu_prime = g.intern_dist(*mu_prime);
              add(w);
            }
        } else if (!g.is_fault_[v.action]) {
          for (auto& [a, mu] : nominal.transitions_from(v.s))
            if (nom_map[a] == v.action) {
              SymbolicVertex w{VertexKind::Prob, v.s, v.t};
              w.mu = g.intern_dist(*mu);
              w.mu_prime = v.pending;
              add(w);
            }
        } else {
          // rule (2.b): a fault is matched by the nominal Dirac stay-put
          SymbolicVertex w{VertexKind::Prob, v.s, v.t};
          w.mu = g.intern_dist(Dist::dirac(v.s));
          w.mu_prime = v.pending;
          add(w);
        }
        if (succ.empty()) add(errv);  // rule (err)
        break;
      }
      case VertexKind::Prob: {
        for (auto& [u, wu] : g.dists_[v.mu].entries())
          for (auto& [u2, wu2] : g.dists_[v.mu_prime].entries())
            add(SymbolicVertex{VertexKind::Refuter, u, u2});
        break;
      }
    }
    g.edges_[id] = std::move(succ);
  }

  g.redges_.assign(g.vertices_.size(), {});
  g.edge_count_ = 0;
  for (VertexId v = 0; v < static_cast<VertexId>(g.vertices_.size()); ++v) {
    g.edge_count_ += g.edges_[v].size();
    for (VertexId w : g.edges_[v]) g.redges_[w].push_back(v);
  }
  return g;
}

/// The equation system of a probabilistic vertex, extended so that couplings
/// put zero mass on the given Refuter successors: margins (mu, mu') with the
/// avoid pairs as forbidden cells.
inline CouplingSystem eq_system(const SymbolicGameGraph& g, VertexId prob_vertex,
                                const std::vector<VertexId>& avoid) {
  const auto& v = g.vertex(prob_vertex);
  std::vector<std::pair<StateId, StateId>> forbidden;
  for (VertexId a : avoid) {
    const auto& r = g.vertex(a);
    forbidden.emplace_back(r.s, r.t);
  }
  return CouplingSystem(g.dist(v.mu), g.dist(v.mu_prime), std::move(forbidden));
}

/// Line-based debug dump: `vertex <id> <kind> <payload>` then `edge <a> <b>`.
inline std::string dump_graph(const SymbolicGameGraph& g, const Pts* nom = nullptr, const Pts* imp = nullptr) {
  std::string out;
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v)
    out += "vertex " + std::to_string(v) + " " + g.describe(v, nom, imp) + "\n";
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v)
    for (VertexId w : g.successors(v)) out += "edge " + std::to_string(v) + " " + std::to_string(w) + "\n";
  return out;
}

inline std::string dot_graph(const SymbolicGameGraph& g, const Pts* nom = nullptr, const Pts* imp = nullptr) {
  std::string out = "digraph masking_game {\n";
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v) {
    const char* shape = "ellipse";
    switch (g.vertex(v).kind) {
      case VertexKind::Refuter: shape = "box"; break;
      case VertexKind::Verifier: shape = "ellipse"; break;
      case VertexKind::Prob: shape = "diamond"; break;
      case VertexKind::Err: shape = "doublecircle"; break;
    }
    out += "  v" + std::to_string(v) + " [shape=" + shape + ",label=\"" + g.describe(v, nom, imp) + "\"];\n";
  }
  for (VertexId v = 0; v < static_cast<VertexId>(g.size()); ++v)
    for (VertexId w : g.successors(v)) out += "  v" + std::to_string(v) + " -> v" + std::to_string(w) + ";\n";
  return out + "}\n";
}

}  // namespace pmask
