#pragma once

// Entailment oracle: is there a point that agrees with the instance on the
// fixed features, satisfies the knowledge and gets a class other than the
// contested one? Answered by a backtracking search with unit propagation over
// the model encoding, plus exhaustive enumeration as a reference.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "kbx/core.hpp"
#include "kbx/models.hpp"

namespace kbx {

struct EntailmentQuery {
  FeatureSet fixed;
  Instance instance;
  ClassIndex contested = 0;
  /// Background knowledge; null means none.
  const KnowledgeBase* knowledge = nullptr;
};

enum class OracleStatus : std::uint8_t { Entails, Counterexample };

struct OracleResult {
  OracleStatus status = OracleStatus::Entails;
  std::optional<Instance> witness;

  bool entails() const { return status == OracleStatus::Entails; }
};

/// Integer score bounds over partially assigned leaf variables.
struct ScoreTheory {
  ScoreMode mode = ScoreMode::SingleScore;
  ClassIndex contested = 0;
  const std::vector<std::vector<std::vector<Encoding::Leaf>>>* groups = nullptr;
};

/// DPLL over clauses with two watched literals and chronological
/// backtracking. Branches only on the given decision variables, in order.
class Solver {
 public:
  explicit Solver(int num_vars) : vals_(static_cast<std::size_t>(num_vars) + 1, kUnassigned),
                                  watches_(2 * (static_cast<std::size_t>(num_vars) + 1)) {}

  void add_clause(std::vector<int> lits) {
    if (unsat_) return;
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 0; i + 1 < lits.size(); ++i) {
      for (std::size_t j = i + 1; j < lits.size(); ++j) {
        if (lits[i] == -lits[j]) return;  // tautology
      }
    }
    if (lits.empty()) {
      unsat_ = true;
      return;
    }
    if (lits.size() == 1) {
      units_.push_back(lits[0]);
      return;
    }
    const auto idx = static_cast<int>(clauses_.size());
    watches_[code(-lits[0])].push_back(idx);
    watches_[code(-lits[1])].push_back(idx);
    clauses_.push_back(std::move(lits));
  }

  void set_theory(ScoreTheory t) { theory_ = t; }
  void set_decision_order(std::vector<std::vector<int>> groups) { decision_groups_ = std::move(groups); }

  bool solve() {
    if (unsat_) return false;
    for (int u : units_) {
      const int v = value(u);
      if (v == kFalse) return false;
      if (v == kUnassigned) assign(u);
    }
    if (!propagate() || !theory_ok()) return false;
    struct Decision {
      int lit;
      bool flipped;
      std::size_t trail_before;
    };
    std::vector<Decision> decisions;
    for (;;) {
      const int lit = pick();
      if (lit == 0) return true;
      decisions.push_back({lit, false, trail_.size()});
      assign(lit);
      while (!propagate() || !theory_ok()) {
        while (!decisions.empty() && decisions.back().flipped) {
          undo_to(decisions.back().trail_before);
          decisions.pop_back();
        }
        if (decisions.empty()) return false;
        Decision& d = decisions.back();
        undo_to(d.trail_before);
        d.flipped = true;
        d.lit = -d.lit;
        assign(d.lit);
      }
    }
  }

  /// True/false value of a variable after a successful solve.
  bool value_of(int var) const { return vals_[static_cast<std::size_t>(var)] == kTrue; }

 private:
  static constexpr std::int8_t kUnassigned = -1, kFalse = 0, kTrue = 1;

  static std::size_t code(int lit) {
    return 2 * static_cast<std::size_t>(lit > 0 ? lit : -lit) + (lit < 0 ? 1 : 0);
  }

  int value(int lit) const {
    const std::int8_t v = vals_[static_cast<std::size_t>(lit > 0 ? lit : -lit)];
    if (v == kUnassigned) return kUnassigned;
    return (lit > 0) == (v == kTrue) ? kTrue : kFalse;
  }

  void assign(int lit) {
    vals_[static_cast<std::size_t>(lit > 0 ? lit : -lit)] = lit > 0 ? kTrue : kFalse;
    trail_.push_back(lit);
  }

  void undo_to(std::size_t n) {
    while (trail_.size() > n) {
      const int lit = trail_.back();
      vals_[static_cast<std::size_t>(lit > 0 ? lit : -lit)] = kUnassigned;
      trail_.pop_back();
    }
    qhead_ = std::min(qhead_, n);
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      const int p = trail_[qhead_++];
      // Clauses watching -p: p just made one of their watched literals false.
      auto& ws = watches_[code(p)];
      std::size_t i = 0, j = 0;
      bool conflict = false;
      while (i < ws.size()) {
        const int ci = ws[i++];
        auto& c = clauses_[static_cast<std::size_t>(ci)];
        if (c[0] == -p) std::swap(c[0], c[1]);
        if (value(c[0]) == kTrue) {
          ws[j++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != kFalse) {
            std::swap(c[1], c[k]);
            watches_[code(-c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = ci;
        if (value(c[0]) == kFalse) {
          conflict = true;
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          assign(c[0]);
        }
      }
      ws.resize(j);
      if (conflict) {
        qhead_ = trail_.size();
        return false;
      }
    }
    return true;
  }

  bool theory_ok() const {
    if (!theory_.groups) return true;
    const auto& groups = *theory_.groups;
    std::vector<std::int64_t> lo(groups.size(), 0), hi(groups.size(), 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (const auto& tree : groups[g]) {
        bool any = false;
        std::int64_t tlo = 0, thi = 0;
        for (const auto& leaf : tree) {
          if (vals_[static_cast<std::size_t>(leaf.var)] == kFalse) continue;
          if (!any) {
            tlo = thi = leaf.weight;
            any = true;
          } else {
            tlo = std::min(tlo, leaf.weight);
            thi = std::max(thi, leaf.weight);
          }
        }
        if (!any) return false;
        lo[g] += tlo;
        hi[g] += thi;
      }
    }
    const ClassIndex c = theory_.contested;
    if (theory_.mode == ScoreMode::SingleScore) {
      // Class 1 iff score > 0.
      return c == 1 ? lo[0] <= 0 : hi[0] > 0;
    }
    for (ClassIndex k = 0; k < groups.size(); ++k) {
      if (k == c) continue;
      if (hi[k] > lo[c] || (hi[k] == lo[c] && k < c)) return true;
    }
    return false;
  }

  int pick() const {
    for (const auto& group : decision_groups_) {
      bool has_true = false;
      int first_open = 0;
      for (int v : group) {
        const auto s = vals_[static_cast<std::size_t>(v)];
        if (s == kTrue) {
          has_true = true;
          break;
        }
        if (s == kUnassigned && first_open == 0) first_open = v;
      }
      if (!has_true && first_open != 0) return first_open;
    }
    for (std::size_t v = 1; v < vals_.size(); ++v) {
      if (vals_[v] == kUnassigned) return static_cast<int>(v);
    }
    return 0;
  }

  std::vector<std::int8_t> vals_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::vector<int>> clauses_;
  std::vector<int> units_;
  std::vector<int> trail_;
  std::size_t qhead_ = 0;
  bool unsat_ = false;
  ScoreTheory theory_;
  std::vector<std::vector<int>> decision_groups_;
};

namespace detail {

inline void check_query(const FeatureSpace& space, const EntailmentQuery& q, std::size_t num_classes) {
  q.instance.validate(space);
  for (std::size_t f : q.fixed) space.check_feature(f);
  if (q.contested >= num_classes) throw StructuralError("contested class out of range");
  if (q.knowledge && !q.knowledge->satisfied(q.instance)) {
    throw PreconditionError("instance is not compatible with the background knowledge");
  }
}

inline bool witness_valid(const Model& model, const EntailmentQuery& q, const Instance& x) {
  for (std::size_t f : q.fixed) {
    if (x[f] != q.instance[f]) return false;
  }
  if (q.knowledge && !q.knowledge->satisfied(x)) return false;
  return classify(model, x) != q.contested;
}

}  // namespace detail

/// Complete oracle over one model. Holds mutable counters, so an instance is
/// meant for one thread at a time; create one per worker.
class Oracle {
 public:
  explicit Oracle(const Model& model) : model_(model), enc_(model_constraints(model)), one_hot_(one_hot_clauses(enc_)) {
    const FeatureSpace& s = *enc_.space;
    for (std::size_t f = 0; f < s.size(); ++f) {
      auto& g = decision_groups_.emplace_back();
      for (ValueIndex v = 0; v < s.domain_size(f); ++v) g.push_back(enc_.indicator(f, v));
    }
  }

  const Model& model() const { return model_; }
  const Encoding& encoding() const { return enc_; }
  std::size_t calls() const { return calls_; }
  void reset_calls() { calls_ = 0; }

  OracleResult entails(const EntailmentQuery& q) {
    const FeatureSpace& space = *enc_.space;
    detail::check_query(space, q, model_classes(model_).size());
    ++calls_;
    Solver s(enc_.num_vars);
    for (const auto& c : query_clauses(q)) s.add_clause(c);
    if (enc_.score_mode) s.set_theory({*enc_.score_mode, q.contested, &enc_.leaf_groups});
    s.set_decision_order(decision_groups_);
    if (!s.solve()) return {OracleStatus::Entails, std::nullopt};
    std::vector<ValueIndex> vals(space.size(), 0);
    for (std::size_t f = 0; f < space.size(); ++f) {
      for (ValueIndex v = 0; v < space.domain_size(f); ++v) {
        if (s.value_of(enc_.indicator(f, v))) vals[f] = v;
      }
    }
    Instance w(std::move(vals));
    if (!detail::witness_valid(model_, q, w)) throw InvariantViolation("oracle produced an invalid witness");
    return {OracleStatus::Counterexample, std::move(w)};
  }

  /// All clauses of a query except the ensemble score comparison.
  std::vector<std::vector<int>> query_clauses(const EntailmentQuery& q) const {
    std::vector<std::vector<int>> out = enc_.clauses;
    out.insert(out.end(), one_hot_.begin(), one_hot_.end());
    if (q.knowledge) {
      for (const auto& c : q.knowledge->clauses()) {
        std::vector<int> lits;
        for (const auto& l : c.literals()) lits.push_back(enc_.literal(l));
        out.push_back(std::move(lits));
      }
    }
    for (std::size_t f : q.fixed) out.push_back({enc_.indicator(f, q.instance[f])});
    if (!enc_.score_mode) {
      std::vector<int> other;
      for (ClassIndex k = 0; k < enc_.class_selectors.size(); ++k) {
        if (k == q.contested) continue;
        other.insert(other.end(), enc_.class_selectors[k].begin(), enc_.class_selectors[k].end());
      }
      out.push_back(std::move(other));
    }
    return out;
  }

  /// DIMACS text of a query. Ensemble score comparisons are not clausal; they
  /// are listed as comment lines (leaf variable and weight per tree).
  std::string to_dimacs(const EntailmentQuery& q) const {
    detail::check_query(*enc_.space, q, model_classes(model_).size());
    const auto cls = query_clauses(q);
    std::ostringstream out;
    out << "c kbx entailment query; indicator var = 1 + offset(feature) + value index\n";
    for (int v = 1; v <= enc_.num_vars; ++v) out << "c var " << v << ' ' << enc_.var_names[static_cast<std::size_t>(v)] << '\n';
    if (enc_.score_mode) {
      out << "c score mode " << (*enc_.score_mode == ScoreMode::SingleScore ? "single" : "per-class")
          << " contested " << q.contested << '\n';
      for (std::size_t g = 0; g < enc_.leaf_groups.size(); ++g) {
        for (std::size_t t = 0; t < enc_.leaf_groups[g].size(); ++t) {
          out << "c tree " << g << ' ' << t;
          for (const auto& l : enc_.leaf_groups[g][t]) out << ' ' << l.var << ':' << l.weight;
          out << '\n';
        }
      }
    }
    out << "p cnf " << enc_.num_vars << ' ' << cls.size() << '\n';
    for (const auto& c : cls) {
      for (int l : c) out << l << ' ';
      out << "0\n";
    }
    return out.str();
  }

 private:
  const Model& model_;
  Encoding enc_;
  std::vector<std::vector<int>> one_hot_;
  std::vector<std::vector<int>> decision_groups_;
  std::size_t calls_ = 0;
};

/// Exhaustive reference oracle. Scans free features in lexicographic order
/// (first feature most significant) and returns the first counterexample.
inline OracleResult entails_bruteforce(const Model& model, const EntailmentQuery& q,
                                       std::uint64_t max_points = 10'000'000) {
  const FeatureSpace& space = *model_space(model);
  const auto points = space.point_count();
  if (points > max_points) {
    throw PreconditionError("feature space has " + points.str() + " points; brute force limit is " +
                            std::to_string(max_points));
  }
  detail::check_query(space, q, model_classes(model).size());
  std::vector<bool> is_fixed(space.size(), false);
  for (std::size_t f : q.fixed) is_fixed[f] = true;
  std::vector<std::size_t> free;
  std::vector<ValueIndex> cur(space.size());
  for (std::size_t f = 0; f < space.size(); ++f) {
    cur[f] = is_fixed[f] ? q.instance[f] : 0;
    if (!is_fixed[f]) free.push_back(f);
  }
  for (;;) {
    Instance x(cur);
    if ((!q.knowledge || q.knowledge->satisfied(x)) && classify(model, x) != q.contested) {
      return {OracleStatus::Counterexample, std::move(x)};
    }
    std::size_t k = free.size();
    for (;;) {
      if (k == 0) return {OracleStatus::Entails, std::nullopt};
      const std::size_t f = free[--k];
      if (++cur[f] < space.domain_size(f)) break;
      cur[f] = 0;
    }
  }
}

}  // namespace kbx
