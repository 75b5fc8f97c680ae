#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pmask/rational.hpp"

namespace pmask {

using StateId = int32_t;

/// Sparse probability distribution over state ids. Entries are kept sorted
/// by state, every stored weight is > 0, and the weights sum to 1 exactly.
class Dist {
 public:
  using Entry = std::pair<StateId, Rat>;

  Dist() = default;

  /// Builds a distribution from raw (state, weight) pairs. Duplicate states
  /// are merged by summing; zero-weight pairs are dropped. Throws if any
  /// weight is negative or the total mass is not exactly 1.
  static Dist from_pairs(std::vector<Entry> pairs) {
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Entry& a, const Entry& b) { return a.first < b.first; });
    std::vector<Entry> merged;
    Rat total = 0;
    for (auto& [s, w] : pairs) {
      if (w < 0) throw std::invalid_argument("negative probability for state " + std::to_string(s));
      if (w == 0) continue;
      total += w;
      if (!merged.empty() && merged.back().first == s)
        merged.back().second += w;
      else
        merged.emplace_back(s, std::move(w));
    }
    if (total != 1)
      throw std::invalid_argument("distribution not normalized: mass = " + rat_to_string(total));
    Dist d;
    d.entries_ = std::move(merged);
    return d;
  }

  static Dist dirac(StateId s) { return from_pairs({{s, Rat(1)}}); }

  const std::vector<Entry>& entries() const { return entries_; }
  size_t support_size() const { return entries_.size(); }

  bool in_support(StateId s) const { return !probability(s).is_zero(); }

  Rat probability(StateId s) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                               [](const Entry& e, StateId v) { return e.first < v; });
    if (it != entries_.end() && it->first == s) return it->second;
    return Rat(0);
  }

  std::vector<StateId> support() const {
    std::vector<StateId> out;
    out.reserve(entries_.size());
    for (auto& [s, w] : entries_) out.push_back(s);
    return out;
  }

  StateId max_state() const { return entries_.empty() ? -1 : entries_.back().first; }

  bool operator==(const Dist& o) const { return entries_ == o.entries_; }
  bool operator!=(const Dist& o) const { return !(*this == o); }

  size_t hash() const {
    size_t h = 0x9e3779b97f4a7c15ull;
    std::hash<Rat> hr;
    for (auto& [s, w] : entries_) {
      h ^= std::hash<StateId>{}(s) + 0x9e3779b9 + (h << 6) + (h >> 2);
      h ^= hr(w) + 0x9e3779b9 + (h << 6) + (h >> 2);
    }
    return h;
  }

  std::string to_string() const {
    std::string out = "{";
    for (size_t i = 0; i < entries_.size(); ++i) {
      if (i) out += ", ";
      out += std::to_string(entries_[i].first) + ": " + rat_to_string(entries_[i].second);
    }
    return out + "}";
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace pmask
