// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include <unistd.h>

#include "brute.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

using namespace kbx;
using namespace kbx::fixtures;

namespace {

const std::string kData = KBX_SOURCE_DIR "/data/";

class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::size_t total() const { return total_; }
  std::string failures() const {
    std::string out;
    for (std::size_t i = 0; i < failures_.size() && i < 4; ++i) out += (i ? "; " : "") + failures_[i];
    if (failures_.size() > 4) out += "; +" + std::to_string(failures_.size() - 4) + " more";
    return out;
  }

 private:
  std::size_t total_ = 0;
  std::vector<std::string> failures_;
};

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome finish(const Checks& c, const std::string& summary) {
  return {c.ok(), c.ok() ? summary : summary + "; failed: " + c.failures()};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

std::string sets_str(const FeatureSpace& s, const std::vector<FeatureSet>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + to_string(s, v[i]);
  return out + "]";
}

std::vector<FeatureSet> by_size(std::vector<FeatureSet> v) {
  std::sort(v.begin(), v.end(), [](const FeatureSet& a, const FeatureSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return v;
}

std::vector<FeatureSet> all_of_kind(ExplainContext& ctx, ExplanationKind kind) {
  return by_size(enumerate_smallest(ctx, kind, 1000).explanations);
}

SchemaHints class_hint(const std::string& column) {
  SchemaHints h;
  h.class_column = column;
  return h;
}

Dataset table1() { return quantize(load_csv(kData + "adult_simplified.csv"), {}); }

Literal eq(const Dataset& d, const std::string& f, const std::string& v) {
  const std::size_t i = d.space->index_of(f);
  return Literal::equals(*d.space, i, d.space->value_index(i, v));
}

bool same_clauses(const KnowledgeBase& kb, const std::vector<Clause>& expected) {
  const auto got = kb.clauses();
  return std::equal(got.begin(), got.end(), expected.begin(), expected.end());
}

bool has_rule(const std::vector<Rule>& rules, const Rule& r) {
  return std::any_of(rules.begin(), rules.end(), [&](const Rule& x) { return x.same_logic(r); });
}

// Worked examples

Outcome ac1() {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  auto s = adult_space();
  const std::vector<FeatureSet> axp{{Education, Status, Occupation, Relationship}};
  const std::vector<FeatureSet> cxps{{Education}, {Status}, {Occupation}, {Relationship}};

  const Model dl = income_dl(s);
  Oracle odl(dl);
  ExplainContext cdl{odl, husband_row(s), kHigh, nullptr};
  const auto dl_axps = all_of_kind(cdl, ExplanationKind::Axp);
  const auto dl_cxps = all_of_kind(cdl, ExplanationKind::Cxp);
  c.expect(dl_axps == axp, "DL AXps " + sets_str(*s, dl_axps));
  c.expect(dl_cxps == cxps, "DL CXps " + sets_str(*s, dl_cxps));

  const BoostedEnsemble bt = income_bt(s);
  const auto score = bt.scores(husband_row(s)).at(0);
  c.expect(score == 1642, "BT score " + std::to_string(score) + " != 1642");
  const Instance service = husband_row(s).with(Occupation, s->value_index(Occupation, "Service"));
  const auto perturbed = bt.scores(service).at(0);
  c.expect(perturbed == -982, "BT perturbed score " + std::to_string(perturbed) + " != -982");
  const Model btm = bt;
  Oracle obt(btm);
  ExplainContext cbt{obt, husband_row(s), kHigh, nullptr};
  const auto bt_axps = all_of_kind(cbt, ExplanationKind::Axp);
  const auto bt_cxps = all_of_kind(cbt, ExplanationKind::Cxp);
  c.expect(bt_axps == axp, "BT AXps " + sets_str(*s, bt_axps));
  c.expect(bt_cxps == cxps, "BT CXps " + sets_str(*s, bt_cxps));

  const Model fig3 = status_dl(s);
  KnowledgeBase kb;
  kb.add(separated_rule_clause(s), 0);
  Oracle o3(fig3);
  const Instance v = separated_row(s);
  ExplainContext plain{o3, v, kLow, nullptr};
  ExplainContext assisted{o3, v, kLow, &kb};
  const auto p_axp = enumerate_smallest(plain, ExplanationKind::Axp, 1).explanations;
  const auto a_axp = enumerate_smallest(assisted, ExplanationKind::Axp, 1).explanations;
  const auto p_cxp = enumerate_smallest(plain, ExplanationKind::Cxp, 1).explanations;
  const auto a_cxp = enumerate_smallest(assisted, ExplanationKind::Cxp, 1).explanations;
  c.expect(p_axp == std::vector<FeatureSet>{{Status, Relationship, Sex}}, "status list AXp " + sets_str(*s, p_axp));
  c.expect(a_axp == std::vector<FeatureSet>{{Relationship, Sex}}, "status list AXp with rule " + sets_str(*s, a_axp));
  c.expect(p_cxp == std::vector<FeatureSet>{{Status}}, "status list smallest CXp " + sets_str(*s, p_cxp));
  c.expect(a_cxp == std::vector<FeatureSet>{{Status, Relationship}},
           "status list smallest CXp with rule " + sets_str(*s, a_cxp) + " != {Status, Relationship}");

  auto abc = abc_space();
  const Model maj = majority_dl(abc);
  const KnowledgeBase mk = majority_knowledge(abc);
  Oracle om(maj);
  const Instance v110(*abc, {1, 1, 0});
  ExplainContext mp{om, v110, 1, nullptr};
  ExplainContext ma{om, v110, 1, &mk};
  c.expect(all_of_kind(mp, ExplanationKind::Axp) == std::vector<FeatureSet>{{0, 1}}, "majority free AXp");
  c.expect(find_axp(ma, all_features(3)) == FeatureSet{2}, "majority assisted AXp");
  const Model par = parity_dl(abc);
  const KnowledgeBase ek = equal_ab_knowledge(abc);
  Oracle op(par);
  const Instance v111(*abc, {1, 1, 1});
  ExplainContext pa{op, v111, 1, &ek};
  c.expect(all_of_kind(pa, ExplanationKind::Cxp) == std::vector<FeatureSet>{{2}}, "parity assisted CXps");

  const Dataset d = table1().without_class();
  const FeatureSpace& ds = *d.space;
  const auto married = enumerate_min_rules(d, eq(d, "Status", "Married"), {}, {}).rules;
  c.expect(has_rule(married, Rule(ds, {eq(d, "Relationship", "Husband")}, eq(d, "Status", "Married"))),
           "Husband -> Married not mined");
  c.expect(has_rule(married, Rule(ds, {eq(d, "Relationship", "Wife")}, eq(d, "Status", "Married"))),
           "Wife -> Married not mined");
  const Rule husband(ds, {eq(d, "Status", "Married"), eq(d, "Sex", "Male")}, eq(d, "Relationship", "Husband"));
  const auto husbands = enumerate_min_rules(d, eq(d, "Relationship", "Husband"), {}, {}).rules;
  c.expect(has_rule(husbands, husband), "Married & Male -> Husband not mined");
  KnowledgeBase blocked;
  blocked.add(rule_to_clause(ds, husband));
  const auto again = enumerate_min_rules(d, eq(d, "Relationship", "Husband"), blocked, {}).rules;
  c.expect(!has_rule(again, husband) && again.size() + 1 == husbands.size(), "blocked clause emitted again");
  ExtractionLimit two;
  two.max_antecedent = 2;
  const Extraction ex = extract_all(d, two);
  std::set<Clause> seen;
  bool unique = true;
  for (const auto& r : ex.rules) unique = seen.insert(rule_to_clause(ds, r)).second && unique;
  c.expect(unique, "a clause was emitted twice");

  const double secs = seconds_since(t0);
  c.expect(secs < 1.0, "took " + fmt(secs) + " s");
  return finish(c, std::to_string(c.total()) + " checks in " + fmt(secs) + " s");
}

// Oracle equivalence

Outcome ac2() {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  gen::Rng rng(20240601);
  std::size_t queries = 0, disagreements = 0, bad_witness = 0;
  while (queries < 1000) {
    auto s = gen::bounded_space(rng, 7, 4, 100000);
    const Model m = gen::model(rng, s);
    Oracle o(m);
    const Instance v = gen::instance(rng, *s);
    const KnowledgeBase kb = gen::knowledge(rng, *s, v, 5);
    FeatureSet z;
    for (std::size_t f = 0; f < s->size(); ++f) {
      if (gen::coin(rng, 0.4)) z.push_back(f);
    }
    const auto cls = static_cast<ClassIndex>(gen::uniform(rng, 0, model_classes(m).size() - 1));
    for (const KnowledgeBase* k : {static_cast<const KnowledgeBase*>(nullptr), &kb}) {
      const EntailmentQuery q{z, v, cls, k};
      const auto fast = o.entails(q);
      const auto ref = entails_bruteforce(m, q);
      ++queries;
      if (fast.entails() != ref.entails()) ++disagreements;
      if (fast.witness && !detail::witness_valid(m, q, *fast.witness)) ++bad_witness;
    }
  }
  const double secs = seconds_since(t0);
  c.expect(disagreements == 0, std::to_string(disagreements) + " disagreements");
  c.expect(bad_witness == 0, std::to_string(bad_witness) + " invalid witnesses");
  c.expect(secs < 300, "took " + fmt(secs) + " s");
  return finish(c, std::to_string(queries) + " queries, " + std::to_string(disagreements) + " disagreements, " +
                       fmt(secs, 1) + " s");
}

// Duality and monotonicity over one corpus of random small models.

struct CorpusResult {
  Outcome duality;
  Outcome monotonicity;
};

CorpusResult ac3_ac4() {
  Checks dual, mono;
  gen::Rng rng(777);
  const std::size_t models = 250;
  std::size_t instances = 0, axp_ineq = 0, cxp_ineq = 0;
  for (std::size_t iter = 0; iter < models; ++iter) {
    auto s = gen::space(rng, 2, 5, 3);
    const Model m = gen::model(rng, s);
    const Instance v = gen::instance(rng, *s);
    const ClassIndex cls = classify(m, v);
    const KnowledgeBase kb = gen::knowledge(rng, *s, v, 4);
    const std::size_t n = s->size();
    Oracle o(m);
    const std::string tag = "model " + std::to_string(iter);

    std::vector<FeatureSet> axps[2], cxps[2];
    int slot = 0;
    for (const KnowledgeBase* k : {static_cast<const KnowledgeBase*>(nullptr), &kb}) {
      axps[slot] = brute::all_minimal(m, v, cls, k, ExplanationKind::Axp);
      cxps[slot] = brute::all_minimal(m, v, cls, k, ExplanationKind::Cxp);
      dual.expect(brute::minimal_hitting_sets(n, cxps[slot]) == axps[slot], tag + ": AXps are not MHS(CXps)");
      dual.expect(brute::minimal_hitting_sets(n, axps[slot]) == cxps[slot], tag + ": CXps are not MHS(AXps)");
      ExplainContext ctx{o, v, cls, k};
      const auto ea = enumerate_smallest(ctx, ExplanationKind::Axp, 1000);
      const auto ec = enumerate_smallest(ctx, ExplanationKind::Cxp, 1000);
      dual.expect(ea.exhausted && by_size(ea.explanations) == axps[slot], tag + ": enumerated AXps differ");
      dual.expect(ec.exhausted && by_size(ec.explanations) == cxps[slot], tag + ": enumerated CXps differ");
      ++slot;
    }

    ++instances;
    for (const auto& x : axps[0]) {
      mono.expect(brute::contains_subset_of(axps[1], x), tag + ": free AXp contains no assisted AXp");
    }
    for (const auto& y : cxps[1]) {
      mono.expect(brute::contains_subset_of(cxps[0], y), tag + ": assisted CXp contains no free CXp");
    }
    const bool axp_ok = axps[1].front().size() <= axps[0].front().size();
    const bool cxp_ok = cxps[1].empty() || cxps[1].front().size() >= cxps[0].front().size();
    axp_ineq += axp_ok;
    cxp_ineq += cxp_ok;
    mono.expect(axp_ok, tag + ": smallest assisted AXp is larger");
    mono.expect(cxp_ok, tag + ": smallest assisted CXp is smaller");
  }
  auto pct = [&](std::size_t k) { return fmt(100.0 * static_cast<double>(k) / static_cast<double>(instances), 1); };
  return {finish(dual, std::to_string(models) + " models, " + std::to_string(dual.total()) + " checks"),
          finish(mono, std::to_string(models) + " models; min-size AXp " + pct(axp_ineq) + "%, CXp " + pct(cxp_ineq) +
                           "%")};
}

// Miner contracts

void check_rules(Checks& c, const Dataset& train, const std::vector<Rule>& rules, std::size_t min_support,
                 const std::string& tag) {
  const FeatureSpace& s = *train.space;
  for (const auto& r : rules) {
    const Clause cl = rule_to_clause(s, r);
    const bool sound = std::all_of(train.rows.begin(), train.rows.end(), [&](const Instance& x) { return cl.satisfied(x); });
    c.expect(sound, tag + ": clause falsified by a training row: " + to_string(s, r));
    for (std::size_t drop = 0; drop < r.size(); ++drop) {
      std::size_t support = 0;
      bool consistent = true;
      for (const auto& row : train.rows) {
        bool holds = true;
        for (std::size_t i = 0; i < r.size() && holds; ++i) holds = i == drop || r.antecedent()[i].satisfied(row);
        if (!holds) continue;
        if (r.consequent().satisfied(row)) ++support;
        else consistent = false;
      }
      c.expect(!(consistent && support >= min_support), tag + ": not minimal: " + to_string(s, r));
    }
  }
}

Outcome ac5() {
  Checks c;
  gen::Rng rng(99);
  std::size_t runs = 0, rules = 0;
  for (int iter = 0; iter < 60; ++iter) {
    auto s = gen::space(rng, 3, 6, 4);
    const Dataset d = gen::dataset(rng, s, gen::uniform(rng, 3, 30));
    ExtractionLimit lim;
    lim.max_antecedent = gen::uniform(rng, 1, 3);
    lim.min_support = gen::uniform(rng, 1, 2);
    const Extraction ex = extract_all(d, lim);
    const std::string tag = "dataset " + std::to_string(iter);
    check_rules(c, d, ex.rules, lim.min_support, tag);
    const auto expected = brute::lattice_extract(d, lim.max_antecedent, lim.min_support);
    c.expect(same_clauses(ex.knowledge, expected), tag + ": lattice differs from brute force");
    ++runs;
    rules += ex.rules.size();
  }
  const Dataset t1 = table1().without_class();
  ExtractionLimit lim;
  lim.max_antecedent = 3;
  const Extraction ex = extract_all(t1, lim);
  check_rules(c, t1, ex.rules, 1, "income table");
  c.expect(same_clauses(ex.knowledge, brute::lattice_extract(t1, 3, 1)), "income table: lattice differs");
  ++runs;
  rules += ex.rules.size();

  const LoadedTable bc = load_csv(kData + "breast_cancer.csv", class_hint("diagnosis"));
  const Dataset bd = quantize(bc, fit_quantization(bc, 5)).without_class();
  lim.max_antecedent = 2;
  const Extraction bx = extract_all(bd, lim);
  check_rules(c, bd, bx.rules, 1, "breast cancer");
  ++runs;
  rules += bx.rules.size();
  return finish(c, std::to_string(runs) + " runs, " + std::to_string(rules) + " rules checked");
}

// Rule accuracy under cross validation

Outcome ac6() {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedTable t = load_csv(kData + "fair.csv", class_hint("had_affair"));
  ExtractionLimit lim;
  lim.max_antecedent = 5;
  const XvalReport rep = cross_validate_rules(t, 5, 1, 6, lim);
  const double secs = seconds_since(t0);
  const auto mean = rep.mean_overall();
  c.expect(t.row_count() >= 500, "fewer than 500 rows");
  c.expect(mean && *mean >= 0.98, "mean accuracy " + (mean ? fmt(*mean, 4) : std::string("n/a")));
  c.expect(!rep.truncated, "mining was truncated");
  c.expect(secs < 600, "took " + fmt(secs) + " s");
  std::string sizes;
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto m = rep.mean_of_size(k);
    sizes += " r" + std::to_string(k) + "=" + (m ? fmt(*m, 4) : std::string("n/a"));
  }
  return finish(c, "fair (" + std::to_string(t.row_count()) + " rows, q=6), 5-fold mean " +
                       (mean ? fmt(*mean, 4) : std::string("n/a")) + ";" + sizes + "; " + fmt(secs, 1) + " s");
}

// Attribution

Outcome ac7() {
  Checks c;
  gen::Rng rng(4242);
  std::size_t axps = 0, needed = 0, fast = 0;
  while (axps < 150) {
    auto s = gen::space(rng, 2, 5, 3);
    const Model m = gen::model(rng, s);
    const Instance v = gen::instance(rng, *s);
    const ClassIndex cls = classify(m, v);
    const KnowledgeBase kb = gen::knowledge(rng, *s, v, 5);
    Oracle o(m);
    ExplainContext ctx{o, v, cls, &kb};
    for (const auto& x : brute::all_minimal(m, v, cls, &kb, ExplanationKind::Axp)) {
      ++axps;
      const std::string tag = "AXp " + std::to_string(axps);
      const auto used = attribute_rules(ctx, x);
      const bool plain = entails_bruteforce(m, {x, v, cls, nullptr}).entails();
      c.expect(used.empty() == plain, tag + ": empty result does not match plain entailment");
      if (used.empty()) {
        ++fast;
        continue;
      }
      ++needed;
      const KnowledgeBase sub = kb.subset(used);
      c.expect(entails_bruteforce(m, {x, v, cls, &sub}).entails(), tag + ": returned rules do not entail");
      for (std::size_t drop = 0; drop < used.size(); ++drop) {
        std::vector<std::size_t> fewer = used;
        fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
        const KnowledgeBase smaller = kb.subset(fewer);
        c.expect(!entails_bruteforce(m, {x, v, cls, &smaller}).entails(), tag + ": a returned rule is redundant");
      }
    }
  }
  c.expect(needed > 0, "no AXp needed knowledge");
  return finish(c, std::to_string(axps) + " assisted AXps (" + std::to_string(needed) + " needing rules, " +
                       std::to_string(fast) + " on the empty fast path)");
}

// Directional check on a quantized dataset

Outcome ac8() {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedTable t = load_csv(kData + "breast_cancer.csv", class_hint("diagnosis"));
  const IndexSplit parts = split_indices(t.row_count(), 0.8, 1);
  const QuantizationSpec spec = fit_quantization(t, 5, parts.train);
  const Dataset all = quantize(t, spec);
  const Dataset train = all.subset(parts.train);
  const Dataset test = all.subset(parts.test);

  ExtractionLimit lim;
  lim.max_antecedent = 2;
  const KnowledgeBase kb = extract_all(train.without_class(), lim).knowledge;
  BtTrainOptions bopt;
  bopt.rounds = 25;
  bopt.depth = 3;
  const std::vector<std::pair<std::string, Model>> models{{"DL", train_decision_list(train)},
                                                          {"BT", train_boosted(train, bopt)}};
  std::vector<std::size_t> rows(test.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::string detail = "breast cancer q=5, " + std::to_string(kb.size()) + " mined clauses";
  for (const auto& [name, m] : models) {
    for (auto kind : {ExplanationKind::Axp, ExplanationKind::Cxp}) {
      const auto res = explain_rows(m, test, rows, &kb, true, kind, 1, default_jobs());
      const auto [p, a] = summarize(res);
      const std::string what = name + " " + std::string(to_string(kind));
      c.expect(p.instances > 0, what + ": no instances explained");
      if (kind == ExplanationKind::Axp) {
        c.expect(a.avg_smallest < p.avg_smallest, what + " did not shrink");
      } else {
        c.expect(a.avg_smallest >= p.avg_smallest, what + " shrank");
      }
      detail += "; " + what + " " + fmt(p.avg_smallest, 2) + "->" + fmt(a.avg_smallest, 2);
    }
    detail += " (acc " + fmt(model_accuracy(m, test), 2) + ")";
  }
  return finish(c, detail + "; " + fmt(seconds_since(t0), 1) + " s");
}

// Assessment of synthetic explanation files

Outcome ac9() {
  Checks c;
  const auto dir = std::filesystem::temp_directory_path() / ("kbx_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string models = kData + "models/";
  auto s = adult_space();

  // Every pair and triple of features for each row, as a heuristic explainer might propose.
  std::string subsets;
  for (std::size_t row = 0; row < 6; ++row) {
    for (std::uint32_t mask = 0; mask < 64; ++mask) {
      const FeatureSet f = brute::from_mask(mask, 6);
      if (f.size() == 2 || f.size() == 3) {
        subsets += Json{{"instance", row}, {"features", feature_names(*s, f)}}.dump() + "\n";
      }
    }
  }
  const std::string subsets_path = (dir / "subsets.jsonl").string();
  write_file(subsets_path, subsets);

  AssessOptions o;
  o.model = models + "status_dl.json";
  o.data.path = kData + "adult_simplified.csv";
  o.subsets = subsets_path;
  o.knowledge = models + "status_knowledge.jsonl";
  o.out = (dir / "report.json").string();
  std::ostringstream sink;
  RunManifest man;
  man.command = "assess";
  c.expect(cmd_assess(o, man, sink) == 0, "assess failed");
  const Json report = parse_json(read_file(o.out), o.out);
  const double without = report["percent_correct_without_knowledge"].get<double>();
  const double with = report["percent_correct_with_knowledge"].get<double>();
  c.expect(with >= without, "knowledge lowered the share of correct AXps");
  for (const auto& item : report["items"]) {
    if (item["correct_without_knowledge"].get<bool>()) {
      c.expect(item["correct_with_knowledge"].get<bool>(), "an AXp stopped being correct under knowledge");
    }
    if (!item["reduced_size"].is_null()) {
      c.expect(item["reduced_size"].get<std::size_t>() <= item["size"].get<std::size_t>(), "reduction grew a set");
    }
  }
  std::filesystem::remove_all(dir);
  return finish(c, std::to_string(report["records"].get<std::size_t>()) + " synthetic AXps, correct " +
                       fmt(without, 1) + "% -> " + fmt(with, 1) +
                       "% with knowledge; the 62-dataset study, BNNs, absolute runtimes and "
                       "LIME/SHAP/Anchor percentages are not reproduced");
}

}  // namespace

int main() {
  bool all = true;
  auto report = [&](const char* id, const char* name, const Outcome& o) {
    all = all && o.pass;
    std::cout << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  };
  auto guarded = [](auto fn) -> Outcome {
    try {
      return fn();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };
  report("AC1", "worked examples", guarded(ac1));
  report("AC2", "oracle equivalence", guarded(ac2));
  CorpusResult corpus{{false, ""}, {false, ""}};
  try {
    corpus = ac3_ac4();
  } catch (const std::exception& e) {
    corpus = {{false, e.what()}, {false, e.what()}};
  }
  report("AC3", "duality", corpus.duality);
  report("AC4", "knowledge monotonicity", corpus.monotonicity);
  report("AC5", "miner contracts", guarded(ac5));
  report("AC6", "rule accuracy", guarded(ac6));
  report("AC7", "attribution", guarded(ac7));
  report("AC8", "directional explanation sizes", guarded(ac8));
  report("AC9", "assessment of external explanations", guarded(ac9));
  return all ? 0 : 1;
}
