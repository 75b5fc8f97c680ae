#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pmask/dist.hpp"

namespace pmask {

using ActionId = int32_t;

struct Transition {
  StateId src;
  ActionId action;
  Dist target;
};

/// Probabilistic transition system: finite states, interned action names,
/// action-labelled transitions into distributions. A designated subset of
/// the actions is marked as fault labels.
class Pts {
 public:
  Pts(StateId state_count, StateId initial) : state_count_(state_count), initial_(initial), by_state_(state_count) {}

  ActionId intern_action(const std::string& name) {
    auto it = action_ids_.find(name);
    if (it != action_ids_.end()) return it->second;
    ActionId id = static_cast<ActionId>(action_names_.size());
    action_names_.push_back(name);
    is_fault_.push_back(false);
    action_ids_.emplace(name, id);
    return id;
  }

  void mark_fault(ActionId a) { is_fault_[a] = true; }

  void add_transition(StateId src, ActionId action, Dist target) {
    by_state_[src].push_back(transitions_.size());
    transitions_.push_back(Transition{src, action, std::move(target)});
  }

  void set_label(StateId s, std::string label) {
    if (labels_.empty()) labels_.resize(state_count_);
    labels_[s] = std::move(label);
  }

  StateId state_count() const { return state_count_; }
  StateId initial() const { return initial_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<std::string>& action_names() const { return action_names_; }
  const std::string& action_name(ActionId a) const { return action_names_[a]; }
  bool is_fault(ActionId a) const { return is_fault_[a]; }

  bool has_faults() const {
    for (bool f : is_fault_)
      if (f) return true;
    return false;
  }

  std::string label(StateId s) const {
    if (s < 0 || static_cast<size_t>(s) >= labels_.size() || labels_[s].empty())
      return "s" + std::to_string(s);
    return labels_[s];
  }

  /// All (action, target) pairs leaving s, in insertion order.
  std::vector<std::pair<ActionId, const Dist*>> transitions_from(StateId s) const {
    std::vector<std::pair<ActionId, const Dist*>> out;
    for (size_t idx : by_state_[s]) out.emplace_back(transitions_[idx].action, &transitions_[idx].target);
    return out;
  }

  const std::vector<size_t>& transition_indices(StateId s) const { return by_state_[s]; }

  /// Checks every structural invariant; returns one message per violation.
  std::vector<std::string> validate() const {
    std::vector<std::string> bad;
    if (initial_ < 0 || initial_ >= state_count_) bad.push_back("initial state out of range");
    for (StateId s = 0; s < state_count_; ++s)
      if (by_state_[s].empty()) bad.push_back("state " + label(s) + " has no transition");
    for (const auto& t : transitions_) {
      if (t.src < 0 || t.src >= state_count_) bad.push_back("transition source out of range");
      Rat total = 0;
      for (auto& [u, w] : t.target.entries()) {
        total += w;
        if (u < 0 || u >= state_count_)
          bad.push_back("transition from " + label(t.src) + " targets invalid state " + std::to_string(u));
      }
      if (total != 1)
        bad.push_back("distribution not normalized on " + action_name(t.action) + " from " + label(t.src));
      if (t.target.entries().empty()) bad.push_back("empty distribution from " + label(t.src));
    }
    return bad;
  }

  /// Deterministic text dump, used by golden tests.
  std::string dump() const {
    std::string out = "states " + std::to_string(state_count_) + " init " + std::to_string(initial_) + "\n";
    for (const auto& t : transitions_) {
      out += std::to_string(t.src) + " " + action_name(t.action);
      if (is_fault(t.action)) out += "!";
      out += " " + t.target.to_string() + "\n";
    }
    return out;
  }

 private:
  StateId state_count_;
  StateId initial_;
  std::vector<std::string> action_names_;
  std::vector<bool> is_fault_;
  std::map<std::string, ActionId> action_ids_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<size_t>> by_state_;
  std::vector<std::string> labels_;
};

}  // namespace pmask
