#pragma once

// Shared models and instances for the small adult-style running example, plus
// the two threshold/parity classifiers over three Boolean features.

#include <memory>
#include <string>
#include <vector>

#include "kbx/kbx.hpp"

namespace kbx::fixtures {

enum AdultFeature : std::size_t { Education, Status, Occupation, Relationship, Sex, Hours };

inline SpacePtr adult_space() {
  return std::make_shared<const FeatureSpace>(std::vector<Feature>{
      {"Education", {"HighSchool", "Bachelors", "Masters", "Dropout"}},
      {"Status", {"Married", "Separated", "Never-Married"}},
      {"Occupation", {"Sales", "Professional", "Service", "Blue-Collar"}},
      {"Relationship", {"Husband", "Wife", "Not-in-family", "Unmarried", "Own-child"}},
      {"Sex", {"Male", "Female"}},
      {"Hours/w", {"<=40", "40-45", ">=45"}},
  });
}

inline const std::vector<std::string>& income_classes() {
  static const std::vector<std::string> c{"<50k", ">=50k"};
  return c;
}

constexpr ClassIndex kLow = 0;
constexpr ClassIndex kHigh = 1;

inline Literal eq(const SpacePtr& s, std::size_t f, const std::string& label) {
  return Literal::equals(*s, f, s->value_index(f, label));
}

inline Literal ne(const SpacePtr& s, std::size_t f, const std::string& label) {
  return Literal::not_equals(*s, f, s->value_index(f, label));
}

inline Instance instance(const SpacePtr& s, const std::vector<std::string>& labels) {
  std::vector<ValueIndex> v;
  for (std::size_t f = 0; f < labels.size(); ++f) v.push_back(s->value_index(f, labels[f]));
  return Instance(*s, std::move(v));
}

/// First row of the six-row table: married husband, predicted >=50k.
inline Instance husband_row(const SpacePtr& s) {
  return instance(s, {"HighSchool", "Married", "Sales", "Husband", "Male", "40-45"});
}

/// Separated dropout in service, predicted <50k by the small list below.
inline Instance separated_row(const SpacePtr& s) {
  return instance(s, {"Dropout", "Separated", "Service", "Not-in-family", "Male", "<=40"});
}

inline DecisionList income_dl(const SpacePtr& s) {
  return DecisionList(s, income_classes(),
                      {
                          {{eq(s, Education, "Dropout")}, kLow},
                          {{eq(s, Occupation, "Service")}, kLow},
                          {{eq(s, Status, "Married"), eq(s, Relationship, "Husband")}, kHigh},
                          {{eq(s, Status, "Married"), eq(s, Relationship, "Wife")}, kHigh},
                      },
                      kLow);
}

inline Tree stump2(Literal root, Literal left, Literal right, std::int64_t w_yy, std::int64_t w_yn,
                   std::int64_t w_ny, std::int64_t w_nn) {
  std::vector<TreeNode> n(7);
  n[0] = {root, 1, 2, 0};
  n[1] = {left, 3, 4, 0};
  n[2] = {right, 5, 6, 0};
  n[3].weight = w_yy;
  n[4].weight = w_yn;
  n[5].weight = w_ny;
  n[6].weight = w_nn;
  return Tree(std::move(n));
}

inline BoostedEnsemble income_bt(const SpacePtr& s) {
  std::vector<Tree> trees{
      stump2(eq(s, Status, "Married"), eq(s, Education, "Dropout"), eq(s, Relationship, "Not-in-family"), -2192,
             1063, -1561, -3850),
      stump2(eq(s, Status, "Married"), eq(s, Occupation, "Service"), eq(s, Hours, ">=45"), -2231, 707, -80, -2549),
      stump2(eq(s, Relationship, "Own-child"), eq(s, Education, "Masters"), eq(s, Education, "Dropout"), 1186, -3483,
             -2844, -128),
  };
  return BoostedEnsemble(s, income_classes(), ScoreMode::SingleScore, 4, {std::move(trees)});
}

inline DecisionList status_dl(const SpacePtr& s) {
  return DecisionList(s, income_classes(),
                      {
                          {{eq(s, Status, "Married")}, kHigh},
                          {{eq(s, Sex, "Male"), ne(s, Relationship, "Husband")}, kLow},
                      },
                      kHigh);
}

/// Sex = Male and Relationship = Not-in-family imply Status = Separated.
inline Clause separated_rule_clause(const SpacePtr& s) {
  Rule r(*s, {eq(s, Sex, "Male"), eq(s, Relationship, "Not-in-family")}, eq(s, Status, "Separated"), 0);
  return rule_to_clause(*s, r);
}

inline SpacePtr abc_space() {
  return std::make_shared<const FeatureSpace>(
      std::vector<Feature>{{"a", {"0", "1"}}, {"b", {"0", "1"}}, {"c", {"0", "1"}}});
}

/// 1 iff at least two of a, b, c are 1.
inline DecisionList majority_dl(const SpacePtr& s) {
  auto one = [&](std::size_t f) { return Literal::equals(*s, f, 1); };
  return DecisionList(s, {"0", "1"}, {{{one(0), one(1)}, 1}, {{one(0), one(2)}, 1}, {{one(1), one(2)}, 1}}, 0);
}

/// Classes EVEN, ODD of a + b + c.
inline DecisionList parity_dl(const SpacePtr& s) {
  std::vector<DlRule> rules;
  for (ValueIndex a = 0; a < 2; ++a) {
    for (ValueIndex b = 0; b < 2; ++b) {
      for (ValueIndex c = 0; c < 2; ++c) {
        if ((a + b + c) % 2 == 1) {
          rules.push_back({{Literal::equals(*s, 0, a), Literal::equals(*s, 1, b), Literal::equals(*s, 2, c)}, 1});
        }
      }
    }
  }
  return DecisionList(s, {"EVEN", "ODD"}, std::move(rules), 0);
}

/// (c = 0 -> a = 1) and (c = 0 -> b = 1)
inline KnowledgeBase majority_knowledge(const SpacePtr& s) {
  KnowledgeBase kb;
  kb.add(Clause(*s, {Literal::equals(*s, 2, 1), Literal::equals(*s, 0, 1)}));
  kb.add(Clause(*s, {Literal::equals(*s, 2, 1), Literal::equals(*s, 1, 1)}));
  return kb;
}

/// a = b
inline KnowledgeBase equal_ab_knowledge(const SpacePtr& s) {
  KnowledgeBase kb;
  kb.add(Clause(*s, {Literal::equals(*s, 0, 0), Literal::equals(*s, 1, 1)}));
  kb.add(Clause(*s, {Literal::equals(*s, 0, 1), Literal::equals(*s, 1, 0)}));
  return kb;
}

}  // namespace kbx::fixtures
