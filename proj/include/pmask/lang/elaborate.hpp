#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pmask/lang/eval.hpp"
#include "pmask/lang/parse.hpp"
#include "pmask/pts.hpp"

namespace pmask::lang {

struct ElaborateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An elaborated model: the Pts plus the variable valuation of every state
/// (for diagnostics, witnesses and relation checks).
struct Elaborated {
  Pts pts;
  std::vector<std::string> var_names;
  std::vector<std::vector<long long>> valuations;

  long long value_of(StateId s, const std::string& var) const {
    for (size_t i = 0; i < var_names.size(); ++i)
      if (var_names[i] == var) return valuations[s][i];
    throw std::out_of_range("no variable " + var);
  }
};

/// Merges command-line constant overrides into a parsed file.
inline void apply_constants(ModelFile& file, const std::map<std::string, Rat>& overrides) {
  for (auto& [name, value] : overrides) file.constants[name] = value;
}

/// Explicit-state elaboration: enumerates the variable valuations reachable
/// from init and emits one transition per (state, enabled command), merging
/// duplicate update targets by summing probability. Fault actions are the
/// union of the file's `faults` header and the caller's set.
inline Elaborated elaborate(const ModelFile& file, const std::set<std::string>& fault_actions = {}) {
  const auto& mod = file.module;

  for (auto& [name, value] : file.constants)
    if (!value) throw ElaborateError("constant " + name + " has no value (use --const " + name + "=...)");

  Env const_env = [&](const std::string& name) -> std::optional<Value> {
    auto it = file.constants.find(name);
    if (it == file.constants.end()) return std::nullopt;
    return Value::num(*it->second);
  };

  auto const_int = [&](const Expr& e, const char* what) -> long long {
    Value v = eval(e, const_env);
    if (v.is_bool || !rat_is_integer(v.number))
      throw ElaborateError(e.pos.str() + std::string(": ") + what + " must be an integer, got " +
                           (v.is_bool ? std::string("a boolean") : rat_to_string(v.number)));
    return v.number.convert_to<long long>();
  };

  const size_t nvars = mod.variables.size();
  std::vector<long long> lo(nvars), hi(nvars), init(nvars);
  for (size_t i = 0; i < nvars; ++i) {
    lo[i] = const_int(mod.variables[i].lower, "variable bound");
    hi[i] = const_int(mod.variables[i].upper, "variable bound");
    init[i] = const_int(mod.variables[i].init, "variable initializer");
    if (lo[i] > hi[i]) throw ElaborateError("variable " + mod.variables[i].name + " has empty range");
    if (init[i] < lo[i] || init[i] > hi[i])
      throw ElaborateError("variable " + mod.variables[i].name + " initialized outside its range");
  }

  // Per-command constant probabilities (checked in [0,1], summing to 1).
  std::vector<std::vector<Rat>> branch_prob(mod.commands.size());
  for (size_t c = 0; c < mod.commands.size(); ++c) {
    const auto& cmd = mod.commands[c];
    Rat total = 0;
    for (auto& branch : cmd.branches) {
      Rat p = 1;
      if (branch.prob) {
        Value v = eval(*branch.prob, const_env);
        if (v.is_bool) throw ElaborateError(branch.prob->pos.str() + ": probability expression must be numeric");
        p = v.number;
      }
      if (p < 0 || p > 1)
        throw ElaborateError(cmd.pos.str() + ": probability " + rat_to_string(p) + " outside [0,1] on [" +
                             cmd.action + "]");
      total += p;
      branch_prob[c].push_back(p);
    }
    if (total != 1)
      throw ElaborateError(cmd.pos.str() + ": probabilities sum to " + rat_to_string(total) + " on [" +
                           cmd.action + "]");
  }

  auto label_of = [&](const std::vector<long long>& vals) {
    std::string out = "(";
    for (size_t i = 0; i < nvars; ++i) {
      if (i) out += ",";
      out += mod.variables[i].name + "=" + std::to_string(vals[i]);
    }
    return out + ")";
  };

  std::map<std::vector<long long>, StateId> ids;
  std::vector<std::vector<long long>> states;
  std::deque<StateId> work;
  auto lookup = [&](const std::vector<long long>& vals) -> StateId {
    auto it = ids.find(vals);
    if (it != ids.end()) return it->second;
    StateId id = static_cast<StateId>(states.size());
    ids.emplace(vals, id);
    states.push_back(vals);
    work.push_back(id);
    return id;
  };
  lookup(init);

  struct Emitted {
    StateId src;
    size_t cmd;
    Dist target;
  };
  std::vector<Emitted> emitted;

  while (!work.empty()) {
    StateId sid = work.front();
    work.pop_front();
    std::vector<long long> vals = states[sid];

    Env state_env = [&](const std::string& name) -> std::optional<Value> {
      for (size_t i = 0; i < nvars; ++i)
        if (mod.variables[i].name == name) return Value::num(Rat(vals[i]));
      return const_env(name);
    };

    bool any_enabled = false;
    for (size_t c = 0; c < mod.commands.size(); ++c) {
      const auto& cmd = mod.commands[c];
      Value g = eval(cmd.guard, state_env);
      if (!g.is_bool) throw ElaborateError(cmd.guard.pos.str() + ": guard must be boolean on [" + cmd.action + "]");
      if (!g.truth) continue;
      any_enabled = true;

      std::vector<Dist::Entry> mass;
      for (size_t b = 0; b < cmd.branches.size(); ++b) {
        if (branch_prob[c][b] == 0) continue;
        std::vector<long long> target = vals;
        for (auto& assign : cmd.branches[b].assigns) {
          Value v = eval(assign.value, state_env);
          if (v.is_bool || !rat_is_integer(v.number))
            throw ElaborateError(assign.pos.str() + ": update must assign an integer to " + assign.var);
          long long nv = v.number.convert_to<long long>();
          for (size_t i = 0; i < nvars; ++i)
            if (mod.variables[i].name == assign.var) {
              if (nv < lo[i] || nv > hi[i])
                throw ElaborateError(assign.pos.str() + ": [" + cmd.action + "] drives " + assign.var + " to " +
                                     std::to_string(nv) + " outside [" + std::to_string(lo[i]) + ".." +
                                     std::to_string(hi[i]) + "] at state " + label_of(vals));
              target[i] = nv;
            }
        }
        mass.emplace_back(lookup(target), branch_prob[c][b]);
      }
      emitted.push_back({sid, c, Dist::from_pairs(std::move(mass))});
    }
    if (!any_enabled)
      throw ElaborateError("deadlock: no command enabled at state " + label_of(vals));
  }

  // Assemble the Pts. Actions are interned in command order so the table is
  // deterministic even for commands that never fire.
  Pts pts(static_cast<StateId>(states.size()), 0);
  for (auto& cmd : mod.commands) pts.intern_action(cmd.action);

  std::set<std::string> faults = file.declared_faults;
  faults.insert(fault_actions.begin(), fault_actions.end());
  for (auto& name : faults) {
    bool appears = false;
    for (auto& cmd : mod.commands) appears |= cmd.action == name;
    if (!appears && !file.declared_faults.count(name))
      throw ElaborateError("fault action " + name + " does not appear in the module");
    if (appears) pts.mark_fault(pts.intern_action(name));
  }

  std::stable_sort(emitted.begin(), emitted.end(), [](const Emitted& a, const Emitted& b) {
    return a.src != b.src ? a.src < b.src : a.cmd < b.cmd;
  });
  for (auto& e : emitted)
    pts.add_transition(e.src, pts.intern_action(mod.commands[e.cmd].action), std::move(e.target));
  for (StateId s = 0; s < pts.state_count(); ++s) pts.set_label(s, label_of(states[s]));

  Elaborated out{std::move(pts), {}, std::move(states)};
  for (auto& v : mod.variables) out.var_names.push_back(v.name);
  return out;
}

/// Convenience: parse + apply constants + elaborate.
inline Elaborated load_model(const std::string& text, const std::map<std::string, Rat>& consts = {},
                             const std::set<std::string>& fault_actions = {}) {
  ModelFile file = parse(text);
  apply_constants(file, consts);
  return elaborate(file, fault_actions);
}

}  // namespace pmask::lang
