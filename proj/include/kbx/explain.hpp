#pragma once

// Abductive (why) and contrastive (why not) explanations, optionally under
// background knowledge: deletion-based extraction, smallest-first enumeration
// through hitting-set duality, audits of arbitrary feature sets, and
// attribution of knowledge clauses to an explanation.

#include <algorithm>
#include <optional>
#include <vector>

#include "kbx/core.hpp"
#include "kbx/hitting_set.hpp"
#include "kbx/oracle.hpp"

namespace kbx {

/// One prediction to explain. `knowledge` may be null.
struct ExplainContext {
  Oracle& oracle;
  Instance instance;
  ClassIndex predicted = 0;
  const KnowledgeBase* knowledge = nullptr;

  std::size_t feature_count() const { return instance.size(); }
};

/// Fixing `fixed` to the instance's values forces the prediction.
inline bool entails_prediction(ExplainContext& ctx, const FeatureSet& fixed, const KnowledgeBase* knowledge) {
  return ctx.oracle.entails({fixed, ctx.instance, ctx.predicted, knowledge}).entails();
}

inline bool is_weak_axp(ExplainContext& ctx, const FeatureSet& s) { return entails_prediction(ctx, s, ctx.knowledge); }

/// Freeing `s` admits a compatible point with another class.
inline bool is_weak_cxp(ExplainContext& ctx, const FeatureSet& s) {
  return !entails_prediction(ctx, complement(s, ctx.feature_count()), ctx.knowledge);
}

/// Deletion-based linear search in ascending feature order; one oracle call per
/// seed feature (plus one to verify the seed when `verify_seed` is set).
inline FeatureSet find_axp(ExplainContext& ctx, FeatureSet seed, bool verify_seed = true) {
  std::sort(seed.begin(), seed.end());
  if (verify_seed && !is_weak_axp(ctx, seed)) {
    throw PreconditionError("find_axp: the seed does not entail the prediction");
  }
  FeatureSet current = seed;
  for (std::size_t f : seed) {
    FeatureSet trial;
    for (std::size_t g : current) {
      if (g != f) trial.push_back(g);
    }
    if (is_weak_axp(ctx, trial)) current = std::move(trial);
  }
  return current;
}

/// Deletion-based shrink of a freed set: each seed feature is re-fixed and
/// stays fixed when a counterexample still exists.
inline FeatureSet find_cxp(ExplainContext& ctx, FeatureSet seed, bool verify_seed = true) {
  std::sort(seed.begin(), seed.end());
  if (verify_seed && !is_weak_cxp(ctx, seed)) {
    throw PreconditionError("find_cxp: freeing the seed does not change the prediction");
  }
  FeatureSet current = seed;
  for (std::size_t f : seed) {
    FeatureSet trial;
    for (std::size_t g : current) {
      if (g != f) trial.push_back(g);
    }
    if (is_weak_cxp(ctx, trial)) current = std::move(trial);
  }
  return current;
}

/// Whether `s` satisfies the explanation condition of `kind` (not minimality).
inline bool check_explanation(ExplainContext& ctx, FeatureSet s, ExplanationKind kind) {
  std::sort(s.begin(), s.end());
  for (std::size_t f : s) {
    if (f >= ctx.feature_count()) throw StructuralError("feature index " + std::to_string(f) + " out of range");
  }
  return kind == ExplanationKind::Axp ? is_weak_axp(ctx, s) : is_weak_cxp(ctx, s);
}

/// Subset-minimal explanation contained in a correct `s`.
inline FeatureSet reduce_explanation(ExplainContext& ctx, FeatureSet s, ExplanationKind kind) {
  if (!check_explanation(ctx, s, kind)) {
    throw PreconditionError("reduce_explanation: the feature set is not a correct explanation");
  }
  return kind == ExplanationKind::Axp ? find_axp(ctx, std::move(s), false) : find_cxp(ctx, std::move(s), false);
}

/// Positions (in the knowledge base) of a subset-minimal set of clauses that
/// still make `axp` entail the prediction. Empty when `axp` needs no knowledge.
inline std::vector<std::size_t> attribute_rules(ExplainContext& ctx, const FeatureSet& axp) {
  if (!ctx.knowledge) throw PreconditionError("attribute_rules needs background knowledge");
  if (!is_weak_axp(ctx, axp)) throw PreconditionError("attribute_rules: not an explanation under the knowledge");
  if (entails_prediction(ctx, axp, nullptr)) return {};
  std::vector<std::size_t> used(ctx.knowledge->size());
  for (std::size_t i = 0; i < used.size(); ++i) used[i] = i;
  for (std::size_t r = 0; r < ctx.knowledge->size(); ++r) {
    std::vector<std::size_t> trial;
    for (std::size_t u : used) {
      if (u != r) trial.push_back(u);
    }
    const KnowledgeBase sub = ctx.knowledge->subset(trial);
    if (entails_prediction(ctx, axp, &sub)) used = std::move(trial);
  }
  return used;
}

/// Explanations collected during enumeration; every AXp hits every CXp.
struct DualState {
  std::vector<FeatureSet> axps;
  std::vector<FeatureSet> cxps;
  std::vector<FeatureSet> blocked;
};

struct Enumeration {
  std::vector<FeatureSet> explanations;
  /// Every explanation of the kind was emitted before reaching the count.
  bool exhausted = false;
  DualState state;
};

/// Up to `n` explanations of `kind`, smallest first. Each candidate is a
/// minimum hitting set of the opposite explanations found so far; a candidate
/// that fails its check yields a new opposite explanation instead.
inline Enumeration enumerate_smallest(ExplainContext& ctx, ExplanationKind kind, std::size_t n = 20) {
  Enumeration out;
  const std::size_t m = ctx.feature_count();
  DualState& st = out.state;
  while (out.explanations.size() < n) {
    const auto& duals = kind == ExplanationKind::Axp ? st.cxps : st.axps;
    auto hs = minimum_hitting_set(m, duals, st.blocked);
    if (!hs) {
      out.exhausted = true;
      break;
    }
    if (kind == ExplanationKind::Axp) {
      auto r = ctx.oracle.entails({*hs, ctx.instance, ctx.predicted, ctx.knowledge});
      if (r.entails()) {
        st.axps.push_back(*hs);
        st.blocked.push_back(*hs);
        out.explanations.push_back(std::move(*hs));
      } else {
        FeatureSet changed;
        for (std::size_t f = 0; f < m; ++f) {
          if ((*r.witness)[f] != ctx.instance[f]) changed.push_back(f);
        }
        st.cxps.push_back(find_cxp(ctx, std::move(changed), false));
      }
    } else {
      FeatureSet fixed = complement(*hs, m);
      if (!entails_prediction(ctx, fixed, ctx.knowledge)) {
        st.cxps.push_back(*hs);
        st.blocked.push_back(*hs);
        out.explanations.push_back(std::move(*hs));
      } else {
        st.axps.push_back(find_axp(ctx, std::move(fixed), false));
      }
    }
  }
  return out;
}

}  // namespace kbx
