#pragma once

// Decision lists and boosted tree ensembles over literal tests, with their
// propositional encodings.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kbx/core.hpp"

namespace kbx {

struct DlRule {
  std::vector<Literal> antecedent;
  ClassIndex cls = 0;
};

/// Ordered rules; the first rule whose antecedent holds decides the class.
class DecisionList {
 public:
  DecisionList(SpacePtr space, std::vector<std::string> classes, std::vector<DlRule> rules, ClassIndex default_class)
      : space_(std::move(space)), classes_(std::move(classes)), rules_(std::move(rules)), default_(default_class) {
    if (classes_.empty()) throw InputError("decision list has no classes");
    check_class(default_);
    for (auto& r : rules_) {
      check_class(r.cls);
      for (const auto& l : r.antecedent) space_->check_value(l.feature(), l.value());
      std::sort(r.antecedent.begin(), r.antecedent.end());
    }
  }

  const SpacePtr& space() const { return space_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<DlRule>& rules() const { return rules_; }
  ClassIndex default_class() const { return default_; }

  /// Index of the rule that fires, or nullopt for the default.
  std::optional<std::size_t> fired_rule(const Instance& inst) const {
    for (std::size_t j = 0; j < rules_.size(); ++j) {
      const auto& a = rules_[j].antecedent;
      if (std::all_of(a.begin(), a.end(), [&](const Literal& l) { return l.satisfied(inst); })) return j;
    }
    return std::nullopt;
  }

  ClassIndex classify(const Instance& inst) const {
    auto j = fired_rule(inst);
    return j ? rules_[*j].cls : default_;
  }

 private:
  void check_class(ClassIndex c) const {
    if (c >= classes_.size()) throw StructuralError("class index " + std::to_string(c) + " out of range");
  }

  SpacePtr space_;
  std::vector<std::string> classes_;
  std::vector<DlRule> rules_;
  ClassIndex default_;
};

struct TreeNode {
  std::optional<Literal> test;  // empty for leaves
  int yes = -1;
  int no = -1;
  std::int64_t weight = 0;  // leaves only, at the ensemble's fixed-point scale

  bool is_leaf() const { return !test.has_value(); }
};

/// Binary tree stored as a node array with the root at index 0.
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw InputError("tree has no nodes");
    std::vector<int> parents(nodes_.size(), 0);
    for (const auto& n : nodes_) {
      if (n.is_leaf()) continue;
      for (int child : {n.yes, n.no}) {
        if (child <= 0 || static_cast<std::size_t>(child) >= nodes_.size()) {
          throw InputError("tree node has an invalid child index");
        }
        ++parents[static_cast<std::size_t>(child)];
      }
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (parents[i] != 1) throw InputError("tree is not a proper binary tree");
    }
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }

  std::size_t leaf_of(const Instance& inst) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      i = static_cast<std::size_t>(nodes_[i].test->satisfied(inst) ? nodes_[i].yes : nodes_[i].no);
    }
    return i;
  }

  std::int64_t value(const Instance& inst) const { return nodes_[leaf_of(inst)].weight; }

 private:
  std::vector<TreeNode> nodes_;
};

enum class ScoreMode : std::uint8_t {
  /// Two classes, one summed score; class 1 iff score > 0.
  SingleScore,
  /// One tree group per class; argmax, ties to the lowest class index.
  PerClass,
};

/// Boosted trees with integer leaf weights at scale 10^-digits.
class BoostedEnsemble {
 public:
  BoostedEnsemble(SpacePtr space, std::vector<std::string> classes, ScoreMode mode, int scale_digits,
                  std::vector<std::vector<Tree>> groups)
      : space_(std::move(space)), classes_(std::move(classes)), mode_(mode), digits_(scale_digits),
        groups_(std::move(groups)) {
    if (mode_ == ScoreMode::SingleScore && (classes_.size() != 2 || groups_.size() != 1)) {
      throw InputError("single-score ensemble needs 2 classes and one tree group");
    }
    if (mode_ == ScoreMode::PerClass && groups_.size() != classes_.size()) {
      throw InputError("per-class ensemble needs one tree group per class");
    }
    if (digits_ < 0 || digits_ > 12) throw InputError("ensemble scale exponent out of range");
    for (const auto& g : groups_) {
      for (const auto& t : g) {
        for (const auto& n : t.nodes()) {
          if (n.test) space_->check_value(n.test->feature(), n.test->value());
        }
      }
    }
  }

  const SpacePtr& space() const { return space_; }
  const std::vector<std::string>& classes() const { return classes_; }
  ScoreMode mode() const { return mode_; }
  int scale_digits() const { return digits_; }
  const std::vector<std::vector<Tree>>& groups() const { return groups_; }

  std::vector<std::int64_t> scores(const Instance& inst) const {
    std::vector<std::int64_t> s;
    for (const auto& g : groups_) {
      std::int64_t sum = 0;
      for (const auto& t : g) sum += t.value(inst);
      s.push_back(sum);
    }
    return s;
  }

  ClassIndex classify(const Instance& inst) const { return decide(scores(inst)); }

  ClassIndex decide(const std::vector<std::int64_t>& s) const {
    if (mode_ == ScoreMode::SingleScore) return s[0] > 0 ? 1 : 0;
    ClassIndex best = 0;
    for (ClassIndex k = 1; k < s.size(); ++k) {
      if (s[k] > s[best]) best = k;
    }
    return best;
  }

 private:
  SpacePtr space_;
  std::vector<std::string> classes_;
  ScoreMode mode_;
  int digits_;
  std::vector<std::vector<Tree>> groups_;
};

using Model = std::variant<DecisionList, BoostedEnsemble>;

inline ClassIndex classify(const Model& m, const Instance& inst) {
  return std::visit([&](const auto& x) { return x.classify(inst); }, m);
}

inline const SpacePtr& model_space(const Model& m) {
  return std::visit([](const auto& x) -> const SpacePtr& { return x.space(); }, m);
}

inline const std::vector<std::string>& model_classes(const Model& m) {
  return std::visit([](const auto& x) -> const std::vector<std::string>& { return x.classes(); }, m);
}

/// Propositional encoding of a model. Variables are numbered from 1; the
/// indicator of `x_f = v` is `1 + offset(f) + v`, followed by model variables.
struct Encoding {
  struct Leaf {
    int var = 0;
    std::int64_t weight = 0;
  };

  SpacePtr space;
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  /// Decision lists: per class, the variables whose truth selects that class.
  /// Exactly one of all these variables is true in every model.
  std::vector<std::vector<int>> class_selectors;
  /// Ensembles: group -> tree -> leaves, one activation variable per leaf.
  std::vector<std::vector<std::vector<Leaf>>> leaf_groups;
  std::optional<ScoreMode> score_mode;
  std::vector<std::string> var_names;  // index = var id

  int indicator(std::size_t feature, ValueIndex value) const {
    return 1 + static_cast<int>(space->offset(feature) + value);
  }

  int literal(const Literal& l) const {
    const int v = indicator(l.feature(), l.value());
    return l.is_equals() ? v : -v;
  }

  int num_indicators() const { return static_cast<int>(space->total_values()); }
};

namespace detail {

inline Encoding encoding_base(const SpacePtr& space) {
  Encoding e;
  e.space = space;
  e.num_vars = static_cast<int>(space->total_values());
  e.var_names.resize(static_cast<std::size_t>(e.num_vars) + 1);
  for (std::size_t f = 0; f < space->size(); ++f) {
    for (ValueIndex v = 0; v < space->domain_size(f); ++v) {
      e.var_names[static_cast<std::size_t>(e.indicator(f, v))] = (*space)[f].name + "=" + (*space)[f].values[v];
    }
  }
  return e;
}

inline int new_var(Encoding& e, std::string name) {
  e.var_names.push_back(std::move(name));
  return ++e.num_vars;
}

/// out <-> AND(lits)
inline void define_and(Encoding& e, int out, const std::vector<int>& lits) {
  std::vector<int> big{out};
  for (int l : lits) {
    e.clauses.push_back({-out, l});
    big.push_back(-l);
  }
  e.clauses.push_back(std::move(big));
}

}  // namespace detail

/// Rule j fires iff its antecedent holds and no earlier antecedent does.
inline Encoding model_constraints(const DecisionList& dl) {
  Encoding e = detail::encoding_base(dl.space());
  const std::size_t n = dl.rules().size();
  e.class_selectors.resize(dl.classes().size());
  int none_before = detail::new_var(e, "none_before_0");
  e.clauses.push_back({none_before});
  for (std::size_t j = 0; j < n; ++j) {
    const int matched = detail::new_var(e, "matched_" + std::to_string(j));
    std::vector<int> lits;
    for (const auto& l : dl.rules()[j].antecedent) lits.push_back(e.literal(l));
    detail::define_and(e, matched, lits);
    const int fires = detail::new_var(e, "fires_" + std::to_string(j));
    detail::define_and(e, fires, {none_before, matched});
    e.class_selectors[dl.rules()[j].cls].push_back(fires);
    const int next = detail::new_var(e, "none_before_" + std::to_string(j + 1));
    detail::define_and(e, next, {none_before, -matched});
    none_before = next;
  }
  e.class_selectors[dl.default_class()].push_back(none_before);
  return e;
}

/// Each leaf is active iff every test on its path agrees; one active leaf per
/// tree. Class scores are linear sums over leaf activations.
inline Encoding model_constraints(const BoostedEnsemble& bt) {
  Encoding e = detail::encoding_base(bt.space());
  e.score_mode = bt.mode();
  for (std::size_t g = 0; g < bt.groups().size(); ++g) {
    auto& group = e.leaf_groups.emplace_back();
    for (std::size_t t = 0; t < bt.groups()[g].size(); ++t) {
      const auto& nodes = bt.groups()[g][t].nodes();
      auto& leaves = group.emplace_back();
      std::vector<int> path;
      auto walk = [&](auto&& self, std::size_t i) -> void {
        const TreeNode& nd = nodes[i];
        if (nd.is_leaf()) {
          const int var = detail::new_var(e, "leaf_" + std::to_string(g) + "_" + std::to_string(t) + "_" +
                                                 std::to_string(i));
          detail::define_and(e, var, path);
          leaves.push_back({var, nd.weight});
          return;
        }
        const int lit = e.literal(*nd.test);
        path.push_back(lit);
        self(self, static_cast<std::size_t>(nd.yes));
        path.back() = -lit;
        self(self, static_cast<std::size_t>(nd.no));
        path.pop_back();
      };
      walk(walk, 0);
      std::vector<int> some_leaf;
      for (const auto& l : leaves) some_leaf.push_back(l.var);
      e.clauses.push_back(std::move(some_leaf));
    }
  }
  return e;
}

inline Encoding model_constraints(const Model& m) {
  return std::visit([](const auto& x) { return model_constraints(x); }, m);
}

/// Exactly one indicator per feature (pairwise at-most-one).
inline std::vector<std::vector<int>> one_hot_clauses(const Encoding& e) {
  std::vector<std::vector<int>> out;
  const FeatureSpace& s = *e.space;
  for (std::size_t f = 0; f < s.size(); ++f) {
    std::vector<int> alo;
    for (ValueIndex v = 0; v < s.domain_size(f); ++v) alo.push_back(e.indicator(f, v));
    for (std::size_t a = 0; a < alo.size(); ++a) {
      for (std::size_t b = a + 1; b < alo.size(); ++b) out.push_back({-alo[a], -alo[b]});
    }
    out.push_back(std::move(alo));
  }
  return out;
}

}  // namespace kbx
