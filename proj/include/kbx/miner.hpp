#pragma once

// Background-knowledge extraction: rules that hold on every training row,
// with subset-minimal antecedents and clause-level duplicate blocking. Also an
// equality-only Eclat baseline and test-set rule accuracy.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "kbx/core.hpp"
#include "kbx/ingest.hpp"

namespace kbx {

using RowSet = boost::dynamic_bitset<std::uint64_t>;

struct ExtractionLimit {
  std::size_t max_antecedent = 5;
  std::optional<std::size_t> max_rules;
  std::optional<std::chrono::milliseconds> time_budget;
  std::size_t min_support = 1;

  void validate() const {
    if (max_antecedent < 1) throw PreconditionError("extraction limit: max antecedent size must be >= 1");
    if (min_support < 1) throw PreconditionError("extraction limit: min support must be >= 1");
  }
};

struct MinedRules {
  std::vector<Rule> rules;
  bool truncated = false;
};

namespace detail {

/// Row sets of every (feature, value) pair.
class RowIndex {
 public:
  explicit RowIndex(const Dataset& ds) : space_(ds.space), all_(ds.size()) {
    all_.set();
    eq_.resize(space_->size());
    for (std::size_t f = 0; f < space_->size(); ++f) {
      eq_[f].assign(space_->domain_size(f), RowSet(ds.size()));
      for (std::size_t r = 0; r < ds.size(); ++r) eq_[f][ds.rows[r][f]].set(r);
    }
  }

  RowSet rows(const Literal& l) const {
    const RowSet& eq = eq_[l.feature()][l.value()];
    return l.is_equals() ? eq : (all_ - eq);
  }

  const RowSet& all() const { return all_; }

 private:
  SpacePtr space_;
  RowSet all_;
  std::vector<std::vector<RowSet>> eq_;
};

class Deadline {
 public:
  explicit Deadline(std::optional<std::chrono::milliseconds> budget) {
    if (budget) end_ = std::chrono::steady_clock::now() + *budget;
  }
  bool expired() {
    if (!end_) return false;
    if (++ticks_ % 256 != 0) return hit_;
    hit_ = hit_ || std::chrono::steady_clock::now() >= *end_;
    return hit_;
  }
  bool hit() const { return hit_; }

 private:
  std::optional<std::chrono::steady_clock::time_point> end_;
  std::uint64_t ticks_ = 0;
  bool hit_ = false;
};

/// Depth-first search for consistent, irredundant antecedents of up to a given
/// size. Literals are added in canonical order, one per feature. Row sets are
/// split into the target's positive and negative rows and kept in per-depth
/// word buffers, so the search does not allocate.
class AntecedentSearch {
 public:
  struct Found {
    std::vector<Literal> antecedent;
    std::size_t support = 0;
  };

  AntecedentSearch(const RowIndex& index, std::vector<Literal> candidates, const RowSet& pos, std::size_t min_support,
                   Deadline& deadline)
      : cands_(std::move(candidates)), min_support_(min_support), deadline_(deadline) {
    const std::size_t n = index.all().size();
    std::vector<std::size_t> pos_rows, neg_rows;
    for (std::size_t r = 0; r < n; ++r) (pos.test(r) ? pos_rows : neg_rows).push_back(r);
    wp_ = (pos_rows.size() + 63) / 64;
    wn_ = (neg_rows.size() + 63) / 64;
    pos_bits_.assign(cands_.size() * wp_, 0);
    neg_bits_.assign(cands_.size() * wn_, 0);
    for (std::size_t i = 0; i < cands_.size(); ++i) {
      const RowSet rs = index.rows(cands_[i]);
      for (std::size_t k = 0; k < pos_rows.size(); ++k) {
        if (rs.test(pos_rows[k])) pos_bits_[i * wp_ + k / 64] |= std::uint64_t{1} << (k % 64);
      }
      for (std::size_t k = 0; k < neg_rows.size(); ++k) {
        if (rs.test(neg_rows[k])) neg_bits_[i * wn_ + k / 64] |= std::uint64_t{1} << (k % 64);
      }
    }
    next_feature_.resize(cands_.size());
    for (std::size_t i = cands_.size(); i-- > 0;) {
      next_feature_[i] = i + 1 < cands_.size() && cands_[i + 1].feature() == cands_[i].feature() ? next_feature_[i + 1]
                                                                                               : i + 1;
    }
    n_pos_ = pos_rows.size();
    n_neg_ = neg_rows.size();
  }

  /// Appends every consistent subset-minimal antecedent of at most `max_size`
  /// literals, in search order.
  void run(std::size_t max_size, std::vector<Found>& out) {
    max_size_ = max_size;
    cov_pos_.assign((max_size + 1) * wp_, 0);
    cov_neg_.assign((max_size + 1) * wn_, 0);
    without_.assign((max_size + 1) * max_size * wn_, 0);
    chosen_.assign(max_size, 0);
    fill_ones(cov_pos_.data(), n_pos_);
    fill_ones(cov_neg_.data(), n_neg_);
    dfs(0, 0, out);
  }

 private:
  static void fill_ones(std::uint64_t* w, std::size_t bits) {
    for (std::size_t k = 0; k < bits / 64; ++k) w[k] = ~std::uint64_t{0};
    if (bits % 64) w[bits / 64] = (std::uint64_t{1} << (bits % 64)) - 1;
  }

  std::uint64_t* pos_at(std::size_t d) { return cov_pos_.data() + d * wp_; }
  std::uint64_t* neg_at(std::size_t d) { return cov_neg_.data() + d * wn_; }
  std::uint64_t* without_at(std::size_t d, std::size_t j) { return without_.data() + (d * max_size_ + j) * wn_; }

  void dfs(std::size_t d, std::size_t from, std::vector<Found>& out) {
    const std::uint64_t* cp = pos_at(d);
    const std::uint64_t* cn = neg_at(d);
    std::uint64_t* np = pos_at(d + 1);
    std::uint64_t* nn = neg_at(d + 1);
    for (std::size_t i = from; i < cands_.size(); ++i) {
      if (deadline_.expired()) return;
      const std::uint64_t* pb = pos_bits_.data() + i * wp_;
      std::size_t support = 0;
      for (std::size_t k = 0; k < wp_; ++k) {
        np[k] = cp[k] & pb[k];
        support += static_cast<std::size_t>(std::popcount(np[k]));
      }
      if (support < min_support_) continue;
      const std::uint64_t* nb = neg_bits_.data() + i * wn_;
      bool any_neg = false, same_as_parent = true;
      for (std::size_t k = 0; k < wn_; ++k) {
        nn[k] = cn[k] & nb[k];
        any_neg = any_neg || nn[k];
        same_as_parent = same_as_parent && nn[k] == cn[k];
      }
      if (same_as_parent) continue;  // excludes no negative row: redundant
      // Dropping an earlier literal must let some negative row back in.
      bool redundant = false;
      for (std::size_t j = 0; j < d && !redundant; ++j) {
        const std::uint64_t* wj = without_at(d, j);
        std::uint64_t* wn = without_at(d + 1, j);
        bool same = true;
        for (std::size_t k = 0; k < wn_; ++k) {
          wn[k] = wj[k] & nb[k];
          same = same && wn[k] == nn[k];
        }
        redundant = same;
      }
      if (redundant) continue;
      chosen_[d] = i;
      if (!any_neg) {
        Found f;
        for (std::size_t j = 0; j <= d; ++j) f.antecedent.push_back(cands_[chosen_[j]]);
        f.support = support;
        out.push_back(std::move(f));
        continue;
      }
      if (d + 1 < max_size_) {
        std::copy(cn, cn + wn_, without_at(d + 1, d));
        dfs(d + 1, next_feature_[i], out);
      }
    }
  }

  std::vector<Literal> cands_;
  std::size_t min_support_;
  Deadline& deadline_;
  std::size_t wp_ = 0, wn_ = 0, n_pos_ = 0, n_neg_ = 0;
  std::vector<std::uint64_t> pos_bits_, neg_bits_;
  std::vector<std::size_t> next_feature_;
  std::size_t max_size_ = 0;
  std::vector<std::uint64_t> cov_pos_, cov_neg_, without_;
  std::vector<std::size_t> chosen_;
};

/// Antecedent literal language for a target on `target_feature`: equalities
/// for every value, inequalities only on domains of size >= 3.
inline std::vector<Literal> candidate_literals(const FeatureSpace& space, std::size_t target_feature) {
  std::vector<Literal> c;
  for (std::size_t f = 0; f < space.size(); ++f) {
    if (f == target_feature) continue;
    for (ValueIndex v = 0; v < space.domain_size(f); ++v) c.push_back(Literal::equals(space, f, v));
    if (space.domain_size(f) >= 3) {
      for (ValueIndex v = 0; v < space.domain_size(f); ++v) c.push_back(Literal::not_equals(space, f, v));
    }
  }
  std::sort(c.begin(), c.end());
  return c;
}

inline MinedRules enumerate_min_rules_impl(const Dataset& train, const RowIndex& index, const Literal& target,
                                           const KnowledgeBase& blocked, const ExtractionLimit& limit,
                                           Deadline& deadline, int first_id, std::size_t rule_budget) {
  const FeatureSpace& space = *train.space;
  MinedRules result;
  std::set<Clause> emitted;
  const RowSet pos = index.rows(target);
  int next_id = first_id;

  auto emit = [&](std::vector<Literal> ante, std::size_t support) {
    if (result.rules.size() >= rule_budget) {
      result.truncated = true;
      return false;
    }
    Rule r(space, std::move(ante), target, next_id, RuleStats{support, 1.0});
    Clause c = rule_to_clause(space, r);
    if (blocked.contains(c) || !emitted.insert(c).second) return true;
    ++next_id;
    result.rules.push_back(std::move(r));
    return true;
  };

  // Empty antecedent: the target holds on every row.
  const std::size_t total_support = pos.count();
  if (total_support < limit.min_support) return result;
  if (pos == index.all()) {
    emit({}, total_support);
    return result;
  }
  AntecedentSearch search(index, candidate_literals(space, target.feature()), pos, limit.min_support, deadline);
  std::vector<AntecedentSearch::Found> found;
  search.run(limit.max_antecedent, found);
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.antecedent.size() != b.antecedent.size()) return a.antecedent.size() < b.antecedent.size();
    return a.antecedent < b.antecedent;
  });
  if (deadline.hit()) result.truncated = true;
  for (auto& f : found) {
    if (!emit(std::move(f.antecedent), f.support)) return result;
  }
  return result;
}

}  // namespace detail

/// Enumerates rules `antecedent -> target` that (a) no training row violates,
/// (b) at least `min_support` rows satisfy, (c) have subset-minimal antecedents
/// and (d) whose clausal form is neither blocked nor already emitted. Output is
/// ordered by antecedent size, then lexicographically.
inline MinedRules enumerate_min_rules(const Dataset& train, const Literal& target, const KnowledgeBase& blocked,
                                      const ExtractionLimit& limit, int first_id = 0) {
  limit.validate();
  train.space->check_value(target.feature(), target.value());
  detail::RowIndex index(train);
  detail::Deadline deadline(limit.time_budget);
  return detail::enumerate_min_rules_impl(train, index, target, blocked, limit, deadline, first_id,
                                          limit.max_rules.value_or(SIZE_MAX));
}

/// Targets in extraction order: every value of every feature.
inline std::vector<Literal> extraction_targets(const FeatureSpace& space) {
  std::vector<Literal> t;
  for (std::size_t f = 0; f < space.size(); ++f) {
    for (ValueIndex v = 0; v < space.domain_size(f); ++v) t.push_back(Literal::equals(space, f, v));
  }
  return t;
}

struct Extraction {
  KnowledgeBase knowledge;
  std::vector<Rule> rules;
  bool truncated = false;
};

/// Rule extraction over all targets. Each emitted clause is blocked before the
/// next target is processed, so no clause is produced twice.
inline Extraction extract_all(const Dataset& train, const ExtractionLimit& limit) {
  limit.validate();
  Extraction ex;
  if (train.size() == 0) return ex;
  const Dataset data = train.without_class();
  detail::RowIndex index(data);
  detail::Deadline deadline(limit.time_budget);
  std::size_t budget = limit.max_rules.value_or(SIZE_MAX);
  for (const Literal& target : extraction_targets(*data.space)) {
    auto mined = detail::enumerate_min_rules_impl(data, index, target, ex.knowledge, limit, deadline,
                                                  static_cast<int>(ex.rules.size()), budget);
    for (auto& r : mined.rules) {
      ex.knowledge.add(rule_to_clause(*data.space, r), r.id());
      ex.rules.push_back(std::move(r));
    }
    budget -= mined.rules.size();
    if (mined.truncated) {
      ex.truncated = true;
      break;
    }
  }
  return ex;
}

/// Targets are mined independently against an empty blocked set and merged in
/// target order with clause deduplication. The result can differ from the
/// sequential extraction in which reading of a clause is kept.
inline Extraction extract_all_parallel(const Dataset& train, const ExtractionLimit& limit, std::size_t jobs) {
  limit.validate();
  Extraction ex;
  if (train.size() == 0) return ex;
  const Dataset data = train.without_class();
  detail::RowIndex index(data);
  const auto targets = extraction_targets(*data.space);
  std::vector<MinedRules> per_target(targets.size());
  std::atomic<std::size_t> next{0};
  const KnowledgeBase empty;
  auto worker = [&] {
    detail::Deadline deadline(limit.time_budget);
    for (std::size_t i; (i = next.fetch_add(1)) < targets.size();) {
      per_target[i] = detail::enumerate_min_rules_impl(data, index, targets[i], empty, limit, deadline, 0, SIZE_MAX);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < std::max<std::size_t>(1, jobs); ++j) pool.emplace_back(worker);
  }
  const std::size_t budget = limit.max_rules.value_or(SIZE_MAX);
  for (auto& mined : per_target) {
    ex.truncated = ex.truncated || mined.truncated;
    for (auto& r : mined.rules) {
      if (ex.rules.size() >= budget) {
        ex.truncated = true;
        return ex;
      }
      Clause c = rule_to_clause(*data.space, r);
      if (ex.knowledge.contains(c)) continue;
      Rule renumbered(*data.space, std::vector<Literal>(r.antecedent().begin(), r.antecedent().end()), r.consequent(),
                      static_cast<int>(ex.rules.size()), r.stats());
      ex.knowledge.add(std::move(c), renumbered.id());
      ex.rules.push_back(std::move(renumbered));
    }
  }
  return ex;
}

/// Equality-only association rules of confidence 1 from frequent itemsets
/// (vertical tid-list intersection). A rule is kept only when no proper
/// subset of its antecedent already implies the consequent.
inline std::vector<Rule> eclat_mine(const Dataset& train, std::size_t min_support, std::size_t max_antecedent) {
  if (min_support < 1) throw PreconditionError("eclat: min support must be >= 1");
  std::vector<Rule> rules;
  if (train.size() == 0) return rules;
  const FeatureSpace& space = *train.space;
  const Dataset data = train.without_class();
  detail::RowIndex index(data);

  struct Item {
    Literal lit;
    RowSet tids;
  };
  std::vector<Item> items;
  for (std::size_t f = 0; f < space.size(); ++f) {
    for (ValueIndex v = 0; v < space.domain_size(f); ++v) {
      Literal l = Literal::equals(space, f, v);
      RowSet t = index.rows(l);
      if (t.count() >= min_support) items.push_back({l, std::move(t)});
    }
  }

  std::vector<std::pair<std::vector<Literal>, Literal>> found;
  std::vector<std::size_t> chosen;
  auto tids_of = [&](const std::vector<std::size_t>& idx, std::size_t skip) {
    RowSet t = index.all();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k != skip) t &= items[idx[k]].tids;
    }
    return t;
  };
  auto implies = [](const RowSet& ante, const RowSet& cons) { return ante.is_subset_of(cons); };

  // Visits the frequent itemset `chosen` with tid-list `tids`.
  auto consider = [&](const RowSet& tids) {
    for (std::size_t y = 0; y < chosen.size(); ++y) {
      std::vector<std::size_t> ante;
      for (std::size_t k = 0; k < chosen.size(); ++k) {
        if (k != y) ante.push_back(chosen[k]);
      }
      if (ante.size() > max_antecedent) continue;
      const RowSet& cons = items[chosen[y]].tids;
      RowSet ante_t = tids_of(ante, SIZE_MAX);
      if (ante_t.count() != tids.count()) continue;  // confidence < 1
      bool minimal = true;
      for (std::size_t k = 0; k < ante.size() && minimal; ++k) {
        if (implies(tids_of(ante, k), cons)) minimal = false;
      }
      if (!minimal) continue;
      std::vector<Literal> lits;
      for (auto i : ante) lits.push_back(items[i].lit);
      found.emplace_back(std::move(lits), items[chosen[y]].lit);
    }
  };

  auto dfs = [&](auto&& self, std::size_t from, const RowSet& tids) -> void {
    for (std::size_t i = from; i < items.size(); ++i) {
      if (!chosen.empty() && items[i].lit.feature() <= items[chosen.back()].lit.feature()) continue;
      RowSet next = tids & items[i].tids;
      if (next.count() < min_support) continue;
      chosen.push_back(i);
      consider(next);
      if (chosen.size() <= max_antecedent) self(self, i + 1, next);
      chosen.pop_back();
    }
  };
  dfs(dfs, 0, index.all());

  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a < b;
  });
  int id = 0;
  for (auto& [ante, cons] : found) {
    RowSet cover = index.rows(cons);
    for (const auto& l : ante) cover &= index.rows(l);
    rules.emplace_back(space, std::move(ante), cons, id++, RuleStats{cover.count(), 1.0});
  }
  return rules;
}

/// Share of test rows that do not falsify the rule's clausal form.
inline double rule_accuracy(const FeatureSpace& space, const Rule& r, const Dataset& test) {
  if (test.size() == 0) throw PreconditionError("rule accuracy of an empty test set");
  const Clause c = rule_to_clause(space, r);
  std::size_t violated = 0;
  for (const auto& row : test.rows) {
    if (!c.satisfied(row)) ++violated;
  }
  return 1.0 - static_cast<double>(violated) / static_cast<double>(test.size());
}

/// rule_accuracy for many rules at once, evaluated with row bitsets.
inline std::vector<double> rule_accuracies(std::span<const Rule> rules, const Dataset& test) {
  if (test.size() == 0) throw PreconditionError("rule accuracy of an empty test set");
  const detail::RowIndex index(test);
  std::vector<double> out;
  out.reserve(rules.size());
  for (const auto& r : rules) {
    RowSet violated = index.all() - index.rows(r.consequent());
    for (const auto& l : r.antecedent()) violated &= index.rows(l);
    out.push_back(1.0 - static_cast<double>(violated.count()) / static_cast<double>(test.size()));
  }
  return out;
}

/// Drops rules whose accuracy on `test` is below `threshold`.
inline std::vector<Rule> filter_by_accuracy(const FeatureSpace& space, std::vector<Rule> rules, const Dataset& test,
                                            double threshold) {
  std::erase_if(rules, [&](const Rule& r) { return rule_accuracy(space, r, test) < threshold; });
  return rules;
}

inline KnowledgeBase knowledge_from_rules(const FeatureSpace& space, std::span<const Rule> rules) {
  KnowledgeBase kb;
  for (const auto& r : rules) kb.add(rule_to_clause(space, r), r.id());
  return kb;
}

}  // namespace kbx
