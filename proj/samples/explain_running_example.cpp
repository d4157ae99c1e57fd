// Mines rules from the six-row income table, then explains one prediction of a
// small decision list with and without those rules as background knowledge.
//
//   sample_explain [data/adult_simplified.csv]

#include <algorithm>
#include <iostream>
#include <iterator>

#include "kbx/kbx.hpp"

using namespace kbx;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "data/adult_simplified.csv";
  const Dataset d = quantize(load_csv(path), {});
  const FeatureSpace& s = *d.space;

  ExtractionLimit lim;
  lim.max_antecedent = 2;
  const Extraction ex = extract_all(d, lim);
  // Keep only what the table says about marital status.
  const auto status = *s.find("Status");
  std::vector<Rule> rules;
  std::copy_if(ex.rules.begin(), ex.rules.end(), std::back_inserter(rules),
               [&](const Rule& r) { return r.consequent().feature() == status; });
  const KnowledgeBase kb = knowledge_from_rules(s, rules);
  std::cout << ex.rules.size() << " rules mined, " << rules.size() << " about Status, for example:\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(rules.size(), 5); ++i) {
    std::cout << "  " << to_string(s, rules[i]) << "\n";
  }

  // Married people earn >=50k; other men who are not husbands earn <50k.
  auto lit = [&](const char* f, const char* v) {
    const auto fi = *s.find(f);
    return Literal::equals(s, fi, s.value_index(fi, v));
  };
  auto male_not_husband = std::vector<Literal>{lit("Sex", "Male"), lit("Relationship", "Husband").negated(s)};
  const auto& labels = d.classes->labels;
  const auto high = static_cast<ClassIndex>(std::find(labels.begin(), labels.end(), ">=50k") - labels.begin());
  const auto low = static_cast<ClassIndex>(std::find(labels.begin(), labels.end(), "<50k") - labels.begin());
  const Model m = DecisionList(d.space, labels, {{{lit("Status", "Married")}, high}, {male_not_husband, low}}, high);

  const Instance& row = d.rows[4];
  Oracle oracle(m);
  const ClassIndex c = classify(m, row);
  std::cout << "\nrow 4 is predicted " << d.classes->labels[c] << "\n";
  for (const KnowledgeBase* k : {static_cast<const KnowledgeBase*>(nullptr), &kb}) {
    ExplainContext ctx{oracle, row, c, k};
    std::cout << (k ? "with knowledge:\n" : "without knowledge:\n");
    for (auto kind : {ExplanationKind::Axp, ExplanationKind::Cxp}) {
      const auto res = enumerate_smallest(ctx, kind, 3);
      for (const auto& e : res.explanations) std::cout << "  " << to_string(kind) << " " << to_string(s, e) << "\n";
    }
  }

  ExplainContext ctx{oracle, row, c, &kb};
  const FeatureSet axp = enumerate_smallest(ctx, ExplanationKind::Axp, 1).explanations.at(0);
  std::cout << "\nthe AXp " << to_string(s, axp) << " relies on:\n";
  for (auto pos : attribute_rules(ctx, axp)) {
    std::cout << "  " << to_string(s, kb[pos]) << "  (rules";
    for (int id : kb.provenance(pos)) std::cout << " " << id;
    std::cout << ")\n";
  }
}
