#pragma once

// Domain vocabulary: feature spaces, instances, literals, clauses, rules and
// knowledge bases. Everything here is an immutable value once built.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kbx/error.hpp"

namespace kbx {

using ValueIndex = std::uint32_t;
using ClassIndex = std::uint32_t;

/// Sorted set of feature indices.
using FeatureSet = std::vector<std::size_t>;

struct Feature {
  std::string name;
  std::vector<std::string> values;

  bool operator==(const Feature&) const = default;
};

/// Finite categorical feature domains. The induced space is the cartesian
/// product of all domains.
class FeatureSpace {
 public:
  FeatureSpace() = default;

  explicit FeatureSpace(std::vector<Feature> features) : features_(std::move(features)) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < features_.size(); ++i) {
      const Feature& f = features_[i];
      if (!index_.emplace(f.name, i).second) {
        throw InputError("duplicate feature name '" + f.name + "'");
      }
      if (f.values.size() < 2) {
        throw InputError("feature '" + f.name + "' has a domain of size " +
                         std::to_string(f.values.size()) + " (at least 2 required)");
      }
      std::vector<std::string> sorted = f.values;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InputError("feature '" + f.name + "' has duplicate value labels");
      }
      offsets_.push_back(offset);
      offset += f.values.size();
    }
    total_values_ = offset;
  }

  std::size_t size() const { return features_.size(); }
  const Feature& operator[](std::size_t i) const { return features_.at(i); }
  const std::vector<Feature>& features() const { return features_; }

  std::size_t domain_size(std::size_t feature) const {
    check_feature(feature);
    return features_[feature].values.size();
  }

  /// Offset of the feature's first value in a flat (feature, value) numbering.
  std::size_t offset(std::size_t feature) const {
    check_feature(feature);
    return offsets_[feature];
  }

  /// Number of (feature, value) pairs.
  std::size_t total_values() const { return total_values_; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view name) const {
    auto i = find(name);
    if (!i) throw InputError("unknown feature '" + std::string(name) + "'");
    return *i;
  }

  std::optional<ValueIndex> find_value(std::size_t feature, std::string_view label) const {
    const auto& vals = (*this)[feature].values;
    auto it = std::find(vals.begin(), vals.end(), label);
    if (it == vals.end()) return std::nullopt;
    return static_cast<ValueIndex>(it - vals.begin());
  }

  ValueIndex value_index(std::size_t feature, std::string_view label) const {
    auto v = find_value(feature, label);
    if (!v) {
      throw InputError("unknown value '" + std::string(label) + "' for feature '" +
                       features_[feature].name + "'");
    }
    return *v;
  }

  /// Exact number of points in the space.
  boost::multiprecision::cpp_int point_count() const {
    boost::multiprecision::cpp_int n = 1;
    for (const auto& f : features_) n *= f.values.size();
    return n;
  }

  void check_feature(std::size_t feature) const {
    if (feature >= features_.size()) {
      throw StructuralError("feature index " + std::to_string(feature) + " out of range (" +
                            std::to_string(features_.size()) + " features)");
    }
  }

  void check_value(std::size_t feature, ValueIndex value) const {
    check_feature(feature);
    if (value >= features_[feature].values.size()) {
      throw StructuralError("value index " + std::to_string(value) + " out of range for feature '" +
                            features_[feature].name + "'");
    }
  }

  bool operator==(const FeatureSpace& o) const { return features_ == o.features_; }

 private:
  std::vector<Feature> features_;
  std::vector<std::size_t> offsets_;
  std::size_t total_values_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const FeatureSpace>;

/// A full point of the feature space: one value index per feature.
class Instance {
 public:
  Instance() = default;
  explicit Instance(std::vector<ValueIndex> values) : values_(std::move(values)) {}

  Instance(const FeatureSpace& space, std::vector<ValueIndex> values) : values_(std::move(values)) {
    validate(space);
  }

  std::size_t size() const { return values_.size(); }
  ValueIndex operator[](std::size_t i) const { return values_[i]; }
  std::span<const ValueIndex> values() const { return values_; }

  Instance with(std::size_t feature, ValueIndex value) const {
    Instance copy = *this;
    copy.values_.at(feature) = value;
    return copy;
  }

  void validate(const FeatureSpace& space) const {
    if (values_.size() != space.size()) {
      throw StructuralError("instance has " + std::to_string(values_.size()) + " values, space has " +
                            std::to_string(space.size()) + " features");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) space.check_value(i, values_[i]);
  }

  auto operator<=>(const Instance&) const = default;

 private:
  std::vector<ValueIndex> values_;
};

enum class Polarity : std::uint8_t { Equals, NotEquals };

/// Feature-value atom `x_f = v` or `x_f != v`. On a two-valued domain the
/// negative form is always rewritten to the positive complement.
class Literal {
 public:
  static Literal equals(const FeatureSpace& space, std::size_t feature, ValueIndex value) {
    space.check_value(feature, value);
    return Literal(feature, Polarity::Equals, value);
  }

  static Literal not_equals(const FeatureSpace& space, std::size_t feature, ValueIndex value) {
    space.check_value(feature, value);
    if (space.domain_size(feature) == 2) return Literal(feature, Polarity::Equals, 1 - value);
    return Literal(feature, Polarity::NotEquals, value);
  }

  static Literal make(const FeatureSpace& space, std::size_t feature, Polarity p, ValueIndex value) {
    return p == Polarity::Equals ? equals(space, feature, value) : not_equals(space, feature, value);
  }

  std::size_t feature() const { return feature_; }
  Polarity polarity() const { return polarity_; }
  ValueIndex value() const { return value_; }
  bool is_equals() const { return polarity_ == Polarity::Equals; }

  Literal negated(const FeatureSpace& space) const {
    return is_equals() ? not_equals(space, feature_, value_) : equals(space, feature_, value_);
  }

  bool holds_for(ValueIndex v) const { return is_equals() == (v == value_); }

  bool satisfied(const Instance& inst) const {
    if (feature_ >= inst.size()) {
      throw StructuralError("literal feature " + std::to_string(feature_) + " not in instance");
    }
    return holds_for(inst[feature_]);
  }

  auto operator<=>(const Literal&) const = default;

 private:
  Literal(std::size_t f, Polarity p, ValueIndex v) : feature_(f), polarity_(p), value_(v) {}

  std::size_t feature_ = 0;
  Polarity polarity_ = Polarity::Equals;
  ValueIndex value_ = 0;
};

inline bool literal_satisfied(const FeatureSpace& space, const Literal& lit, const Instance& inst) {
  space.check_value(lit.feature(), lit.value());
  inst.validate(space);
  return lit.satisfied(inst);
}

/// Human-readable form, e.g. `Status = Married` or `Sex != Male`.
inline std::string to_string(const FeatureSpace& space, const Literal& lit) {
  const Feature& f = space[lit.feature()];
  return f.name + (lit.is_equals() ? " = " : " != ") + f.values.at(lit.value());
}

/// Disjunction of literals, kept sorted and duplicate free.
class Clause {
 public:
  Clause() = default;

  /// Throws PreconditionError for tautologies (literals on one feature that
  /// together cover its whole domain, e.g. `x = v` with `x != v`).
  Clause(const FeatureSpace& space, std::vector<Literal> lits) : lits_(std::move(lits)) {
    std::sort(lits_.begin(), lits_.end());
    lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
    for (const auto& l : lits_) space.check_value(l.feature(), l.value());
    for (auto it = lits_.begin(); it != lits_.end();) {
      auto end = std::find_if(it, lits_.end(), [&](const Literal& l) { return l.feature() != it->feature(); });
      const std::size_t dom = space.domain_size(it->feature());
      std::size_t covered = 0;
      for (ValueIndex v = 0; v < dom; ++v) {
        if (std::any_of(it, end, [&](const Literal& l) { return l.holds_for(v); })) ++covered;
      }
      if (covered == dom) {
        throw PreconditionError("clause is a tautology on feature '" + space[it->feature()].name + "'");
      }
      it = end;
    }
  }

  std::span<const Literal> literals() const { return lits_; }
  std::size_t size() const { return lits_.size(); }
  bool empty() const { return lits_.empty(); }

  bool satisfied(const Instance& inst) const {
    return std::any_of(lits_.begin(), lits_.end(), [&](const Literal& l) { return l.satisfied(inst); });
  }

  auto operator<=>(const Clause&) const = default;

 private:
  std::vector<Literal> lits_;
};

inline std::string to_string(const FeatureSpace& space, const Clause& c) {
  std::string out = "(";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += " | ";
    out += to_string(space, c.literals()[i]);
  }
  return out + ")";
}

struct RuleStats {
  std::size_t support = 0;
  double consistency = 1.0;
};

/// IF antecedent THEN consequent.
class Rule {
 public:
  Rule(const FeatureSpace& space, std::vector<Literal> antecedent, Literal consequent, int id = -1,
       RuleStats stats = {})
      : antecedent_(std::move(antecedent)), consequent_(consequent), id_(id), stats_(stats) {
    std::sort(antecedent_.begin(), antecedent_.end());
    antecedent_.erase(std::unique(antecedent_.begin(), antecedent_.end()), antecedent_.end());
    space.check_value(consequent_.feature(), consequent_.value());
    for (auto it = antecedent_.begin(); it != antecedent_.end();) {
      const std::size_t f = it->feature();
      space.check_value(f, it->value());
      if (f == consequent_.feature()) {
        throw PreconditionError("rule consequent feature '" + space[f].name + "' occurs in its antecedent");
      }
      auto end = std::find_if(it, antecedent_.end(), [&](const Literal& l) { return l.feature() != f; });
      if (std::count_if(it, end, [](const Literal& l) { return l.is_equals(); }) > 1) {
        throw PreconditionError("rule antecedent has two equalities on '" + space[f].name + "'");
      }
      bool some_value_allowed = false;
      for (ValueIndex v = 0; v < space.domain_size(f); ++v) {
        if (std::all_of(it, end, [&](const Literal& l) { return l.holds_for(v); })) some_value_allowed = true;
      }
      if (!some_value_allowed) {
        throw PreconditionError("rule antecedent excludes the whole domain of '" + space[f].name + "'");
      }
      it = end;
    }
  }

  std::span<const Literal> antecedent() const { return antecedent_; }
  const Literal& consequent() const { return consequent_; }
  int id() const { return id_; }
  const RuleStats& stats() const { return stats_; }
  std::size_t size() const { return antecedent_.size(); }

  bool antecedent_holds(const Instance& inst) const {
    return std::all_of(antecedent_.begin(), antecedent_.end(), [&](const Literal& l) { return l.satisfied(inst); });
  }

  /// Logical content only; ids and statistics are ignored.
  bool same_logic(const Rule& o) const { return antecedent_ == o.antecedent_ && consequent_ == o.consequent_; }

 private:
  std::vector<Literal> antecedent_;
  Literal consequent_;
  int id_;
  RuleStats stats_;
};

inline std::string to_string(const FeatureSpace& space, const Rule& r) {
  std::string out = "IF ";
  if (r.antecedent().empty()) out += "TRUE";
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) out += " AND ";
    out += to_string(space, r.antecedent()[i]);
  }
  return out + " THEN " + to_string(space, r.consequent());
}

/// Clausal form: negated antecedent literals plus the consequent.
inline Clause rule_to_clause(const FeatureSpace& space, const Rule& r) {
  std::vector<Literal> lits;
  lits.reserve(r.size() + 1);
  for (const auto& l : r.antecedent()) lits.push_back(l.negated(space));
  lits.push_back(r.consequent());
  return Clause(space, std::move(lits));
}

/// All if-then readings of a clause, one per choice of consequent literal.
/// Requires at most one literal per feature.
inline std::vector<Rule> clause_to_rules(const FeatureSpace& space, const Clause& c) {
  std::vector<Rule> rules;
  const auto lits = c.literals();
  for (std::size_t i = 0; i < lits.size(); ++i) {
    std::vector<Literal> ante;
    for (std::size_t j = 0; j < lits.size(); ++j) {
      if (j != i) ante.push_back(lits[j].negated(space));
    }
    rules.emplace_back(space, std::move(ante), lits[i]);
  }
  return rules;
}

/// Conjunction of clauses over feature literals, with the ids of the rules
/// each clause came from.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  /// Adds a clause; returns false when an equal clause is already present, in
  /// which case only the provenance grows.
  bool add(Clause clause, std::optional<int> rule_id = std::nullopt) {
    auto [it, inserted] = index_.try_emplace(clause, clauses_.size());
    if (inserted) {
      clauses_.push_back(std::move(clause));
      provenance_.emplace_back();
    }
    if (rule_id) provenance_[it->second].push_back(*rule_id);
    return inserted;
  }

  bool contains(const Clause& c) const { return index_.contains(c); }
  std::size_t size() const { return clauses_.size(); }
  bool empty() const { return clauses_.empty(); }
  const Clause& operator[](std::size_t i) const { return clauses_.at(i); }
  std::span<const Clause> clauses() const { return clauses_; }
  std::span<const int> provenance(std::size_t i) const { return provenance_.at(i); }

  bool satisfied(const Instance& inst) const {
    return std::all_of(clauses_.begin(), clauses_.end(), [&](const Clause& c) { return c.satisfied(inst); });
  }

  /// Sub-knowledge-base made of the clauses at the given positions.
  KnowledgeBase subset(std::span<const std::size_t> positions) const {
    KnowledgeBase kb;
    for (std::size_t p : positions) {
      kb.add(clauses_.at(p));
      kb.provenance_.back() = provenance_.at(p);
    }
    return kb;
  }

 private:
  std::vector<Clause> clauses_;
  std::vector<std::vector<int>> provenance_;
  std::map<Clause, std::size_t> index_;
};

enum class ExplanationKind : std::uint8_t { Axp, Cxp };

inline std::string_view to_string(ExplanationKind k) { return k == ExplanationKind::Axp ? "axp" : "cxp"; }

struct Explanation {
  ExplanationKind kind = ExplanationKind::Axp;
  FeatureSet features;
  bool knowledge_assisted = false;
  Instance instance;
  ClassIndex predicted_class = 0;
};

inline FeatureSet all_features(std::size_t m) {
  FeatureSet s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = i;
  return s;
}

inline FeatureSet complement(const FeatureSet& s, std::size_t m) {
  FeatureSet out;
  std::size_t j = 0;
  for (std::size_t i = 0; i < m; ++i) {
    while (j < s.size() && s[j] < i) ++j;
    if (j < s.size() && s[j] == i) continue;
    out.push_back(i);
  }
  return out;
}

inline std::string to_string(const FeatureSpace& space, const FeatureSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += space[s[i]].name;
  }
  return out + "}";
}

}  // namespace kbx
