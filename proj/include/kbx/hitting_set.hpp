#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kbx/core.hpp"

namespace kbx {

/// Exact minimum-cardinality hitting set by branch and bound.
///
/// Finds a smallest H over elements 0..n-1 that intersects every set in
/// `sets` and contains no set of `blocked` in full. Elements are branched in
/// increasing order, include first, and only strictly better solutions
/// replace the incumbent, so among equal-size answers the lexicographically
/// smallest sorted sequence wins. Returns nullopt when no such H exists.
class HittingSetSolver {
 public:
  HittingSetSolver(std::size_t n, const std::vector<FeatureSet>& sets, const std::vector<FeatureSet>& blocked)
      : n_(n), sets_(sets), blocked_(blocked), containing_(n), blocked_containing_(n) {
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      for (std::size_t e : sets_[s]) containing_.at(e).push_back(s);
    }
    for (std::size_t b = 0; b < blocked_.size(); ++b) {
      for (std::size_t e : blocked_[b]) blocked_containing_.at(e).push_back(b);
    }
  }

  std::optional<FeatureSet> solve() {
    for (const auto& b : blocked_) {
      if (b.empty()) return std::nullopt;  // every set contains the empty set
    }
    for (const auto& s : sets_) {
      if (s.empty()) return std::nullopt;
    }
    hits_.assign(sets_.size(), 0);
    blocked_in_.assign(blocked_.size(), 0);
    unhit_ = sets_.size();
    current_.clear();
    best_.reset();
    best_size_ = n_ + 1;
    search(0);
    return best_;
  }

 private:
  void search(std::size_t e) {
    if (unhit_ == 0) {
      if (current_.size() < best_size_) {
        best_ = current_;
        best_size_ = current_.size();
      }
      return;
    }
    if (e == n_) return;
    if (current_.size() + lower_bound(e) >= best_size_) return;

    if (!completes_blocked(e)) {
      include(e);
      search(e + 1);
      exclude(e);
    }
    search(e + 1);
  }

  /// Greedy packing of pairwise disjoint unhit sets restricted to elements
  /// >= e; each needs its own element. Returns n+1 if some unhit set can no
  /// longer be hit.
  std::size_t lower_bound(std::size_t e) {
    std::vector<bool> used(n_, false);
    std::size_t bound = 0;
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      if (hits_[s]) continue;
      bool reachable = false, disjoint = true;
      for (std::size_t x : sets_[s]) {
        if (x < e) continue;
        reachable = true;
        if (used[x]) disjoint = false;
      }
      if (!reachable) return n_ + 1;
      if (disjoint) {
        ++bound;
        for (std::size_t x : sets_[s]) {
          if (x >= e) used[x] = true;
        }
      }
    }
    return bound;
  }

  bool completes_blocked(std::size_t e) const {
    for (std::size_t b : blocked_containing_[e]) {
      if (blocked_in_[b] + 1 == blocked_[b].size()) return true;
    }
    return false;
  }

  void include(std::size_t e) {
    current_.push_back(e);
    for (std::size_t s : containing_[e]) {
      if (hits_[s]++ == 0) --unhit_;
    }
    for (std::size_t b : blocked_containing_[e]) ++blocked_in_[b];
  }

  void exclude(std::size_t e) {
    current_.pop_back();
    for (std::size_t s : containing_[e]) {
      if (--hits_[s] == 0) ++unhit_;
    }
    for (std::size_t b : blocked_containing_[e]) --blocked_in_[b];
  }

  std::size_t n_;
  const std::vector<FeatureSet>& sets_;
  const std::vector<FeatureSet>& blocked_;
  std::vector<std::vector<std::size_t>> containing_;
  std::vector<std::vector<std::size_t>> blocked_containing_;
  std::vector<std::size_t> hits_;
  std::vector<std::size_t> blocked_in_;
  std::size_t unhit_ = 0;
  FeatureSet current_;
  std::optional<FeatureSet> best_;
  std::size_t best_size_ = 0;
};

inline std::optional<FeatureSet> minimum_hitting_set(std::size_t n, const std::vector<FeatureSet>& sets,
                                                     const std::vector<FeatureSet>& blocked = {}) {
  return HittingSetSolver(n, sets, blocked).solve();
}

}  // namespace kbx
