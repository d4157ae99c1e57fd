#pragma once

// Small trainers for producing desk-scale models from quantized data: greedy
// sequential covering for decision lists and Newton-step gradient boosting of
// shallow trees for ensembles.

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "kbx/ingest.hpp"
#include "kbx/models.hpp"

namespace kbx {

struct DlTrainOptions {
  std::size_t max_rules = 20;
  std::size_t max_rule_size = 3;
  std::size_t min_cover = 2;
};

struct BtTrainOptions {
  std::size_t rounds = 10;
  std::size_t depth = 1;
  double learning_rate = 0.3;
  double lambda = 1.0;
  int scale_digits = 4;
  std::size_t min_leaf = 1;
};

namespace detail {

inline void require_labels(const Dataset& d) {
  if (!d.classes) throw PreconditionError("training needs a class column");
  if (d.size() == 0) throw PreconditionError("training needs at least one row");
  if (d.classes->labels.size() < 2) throw PreconditionError("training needs at least two classes");
}

inline ClassIndex majority(const Dataset& d, const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> count(d.classes->labels.size(), 0);
  for (auto r : rows) ++count[d.classes->values[r]];
  return static_cast<ClassIndex>(std::max_element(count.begin(), count.end()) - count.begin());
}

}  // namespace detail

/// Sequential covering. Each rule is grown greedily for one class by weighted
/// relative accuracy over the rows not yet covered; the best class's rule is
/// kept and its rows removed.
inline DecisionList train_decision_list(const Dataset& d, const DlTrainOptions& opt = {}) {
  detail::require_labels(d);
  const FeatureSpace& s = *d.space;
  const std::size_t k = d.classes->labels.size();
  std::vector<std::size_t> remaining(d.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<DlRule> rules;

  while (!remaining.empty() && rules.size() < opt.max_rules) {
    const auto n = static_cast<double>(remaining.size());
    std::vector<double> prior(k, 0.0);
    for (auto r : remaining) prior[d.classes->values[r]] += 1.0 / n;
    auto wracc = [&](const std::vector<std::size_t>& rows, ClassIndex c) {
      double hit = 0;
      for (auto r : rows) hit += d.classes->values[r] == c;
      const auto cover = static_cast<double>(rows.size());
      return cover / n * (hit / cover - prior[c]);
    };
    std::vector<Literal> best_ante;
    std::vector<std::size_t> best_rows;
    ClassIndex best_cls = 0;
    double best_score = 1e-9;
    for (ClassIndex c = 0; c < k; ++c) {
      std::vector<Literal> ante;
      std::vector<std::size_t> covered = remaining;
      double score = 0;
      while (ante.size() < opt.max_rule_size) {
        std::optional<Literal> pick;
        std::vector<std::size_t> pick_rows;
        double pick_score = score;
        for (std::size_t f = 0; f < s.size(); ++f) {
          if (std::any_of(ante.begin(), ante.end(), [&](const Literal& l) { return l.feature() == f; })) continue;
          for (ValueIndex v = 0; v < s.domain_size(f); ++v) {
            std::vector<std::size_t> rows;
            for (auto r : covered) {
              if (d.rows[r][f] == v) rows.push_back(r);
            }
            if (rows.size() < opt.min_cover) continue;
            const double q = wracc(rows, c);
            if (q > pick_score + 1e-12) {
              pick = Literal::equals(s, f, v);
              pick_rows = std::move(rows);
              pick_score = q;
            }
          }
        }
        if (!pick) break;
        ante.push_back(*pick);
        covered = std::move(pick_rows);
        score = pick_score;
      }
      if (!ante.empty() && score > best_score) {
        best_score = score;
        best_ante = std::move(ante);
        best_rows = std::move(covered);
        best_cls = c;
      }
    }
    if (best_ante.empty()) break;
    rules.push_back({best_ante, best_cls});
    std::set<std::size_t> gone(best_rows.begin(), best_rows.end());
    std::erase_if(remaining, [&](std::size_t r) { return gone.contains(r); });
  }
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), 0);
  const ClassIndex def = detail::majority(d, remaining.empty() ? all : remaining);
  return DecisionList(d.space, d.classes->labels, std::move(rules), def);
}

namespace detail {

struct BoostTreeBuilder {
  const Dataset& d;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const BtTrainOptions& opt;
  double scale;
  std::vector<TreeNode> nodes;

  double leaf_value(const std::vector<std::size_t>& rows) const {
    double g = 0, h = 0;
    for (auto r : rows) {
      g += grad[r];
      h += hess[r];
    }
    return -g / (h + opt.lambda) * opt.learning_rate;
  }

  int build(const std::vector<std::size_t>& rows, std::size_t depth) {
    const int idx = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const FeatureSpace& s = *d.space;
    double g_all = 0, h_all = 0;
    for (auto r : rows) {
      g_all += grad[r];
      h_all += hess[r];
    }
    const double base = g_all * g_all / (h_all + opt.lambda);
    std::optional<Literal> best;
    double best_gain = 1e-9;
    if (depth < opt.depth) {
      for (std::size_t f = 0; f < s.size(); ++f) {
        std::vector<double> g(s.domain_size(f), 0), h(s.domain_size(f), 0);
        std::vector<std::size_t> n(s.domain_size(f), 0);
        for (auto r : rows) {
          const auto v = d.rows[r][f];
          g[v] += grad[r];
          h[v] += hess[r];
          ++n[v];
        }
        for (ValueIndex v = 0; v < s.domain_size(f); ++v) {
          if (n[v] < opt.min_leaf || rows.size() - n[v] < opt.min_leaf) continue;
          const double gl = g[v], hl = h[v], gr = g_all - gl, hr = h_all - hl;
          const double gain = gl * gl / (hl + opt.lambda) + gr * gr / (hr + opt.lambda) - base;
          if (gain > best_gain) {
            best_gain = gain;
            best = Literal::equals(s, f, v);
          }
        }
      }
    }
    if (!best) {
      nodes[static_cast<std::size_t>(idx)].weight = std::llround(leaf_value(rows) * scale);
      return idx;
    }
    std::vector<std::size_t> yes, no;
    for (auto r : rows) (best->satisfied(d.rows[r]) ? yes : no).push_back(r);
    const int y = build(yes, depth + 1);
    const int n = build(no, depth + 1);
    auto& node = nodes[static_cast<std::size_t>(idx)];
    node.test = best;
    node.yes = y;
    node.no = n;
    return idx;
  }
};

}  // namespace detail

/// Binary data gives a single-score ensemble (logistic loss); more classes give
/// one tree per class per round (softmax loss). Leaf values are rounded to the
/// fixed-point scale before they update the running scores.
inline BoostedEnsemble train_boosted(const Dataset& d, const BtTrainOptions& opt = {}) {
  detail::require_labels(d);
  if (opt.depth < 1) throw PreconditionError("tree depth must be at least 1");
  const std::size_t k = d.classes->labels.size();
  const std::size_t n = d.size();
  const bool binary = k == 2;
  const std::size_t groups = binary ? 1 : k;
  const double scale = std::pow(10.0, opt.scale_digits);
  std::vector<std::vector<double>> score(groups, std::vector<double>(n, 0.0));
  std::vector<std::vector<Tree>> trees(groups);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (std::size_t round = 0; round < opt.rounds; ++round) {
    std::vector<std::vector<double>> prob(groups, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (binary) {
        prob[0][i] = 1.0 / (1.0 + std::exp(-score[0][i]));
      } else {
        double mx = -std::numeric_limits<double>::infinity(), z = 0;
        for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, score[c][i]);
        for (std::size_t c = 0; c < k; ++c) z += std::exp(score[c][i] - mx);
        for (std::size_t c = 0; c < k; ++c) prob[c][i] = std::exp(score[c][i] - mx) / z;
      }
    }
    for (std::size_t c = 0; c < groups; ++c) {
      std::vector<double> grad(n), hess(n);
      const ClassIndex positive = binary ? 1 : static_cast<ClassIndex>(c);
      for (std::size_t i = 0; i < n; ++i) {
        const double y = d.classes->values[i] == positive ? 1.0 : 0.0;
        grad[i] = prob[c][i] - y;
        hess[i] = std::max(prob[c][i] * (1.0 - prob[c][i]), 1e-6);
      }
      detail::BoostTreeBuilder b{d, grad, hess, opt, scale, {}};
      b.build(all, 0);
      Tree t(std::move(b.nodes));
      for (std::size_t i = 0; i < n; ++i) score[c][i] += static_cast<double>(t.value(d.rows[i])) / scale;
      trees[c].push_back(std::move(t));
    }
  }
  return BoostedEnsemble(d.space, d.classes->labels, binary ? ScoreMode::SingleScore : ScoreMode::PerClass,
                         opt.scale_digits, std::move(trees));
}

inline double model_accuracy(const Model& m, const Dataset& d) {
  if (!d.classes || d.size() == 0) throw PreconditionError("accuracy needs labelled rows");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < d.size(); ++i) hit += classify(m, d.rows[i]) == d.classes->values[i];
  return static_cast<double>(hit) / static_cast<double>(d.size());
}

}  // namespace kbx
