#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "generators.hpp"

using namespace kbx;
using namespace kbx::fixtures;

namespace {

const std::string kModels = KBX_SOURCE_DIR "/data/models/";

void expect_same_predictions(const Model& a, const Model& b, gen::Rng& rng, int samples) {
  const FeatureSpace& s = *model_space(a);
  for (int i = 0; i < samples; ++i) {
    const Instance x = gen::instance(rng, s);
    ASSERT_EQ(classify(a, x), classify(b, x));
  }
}

}  // namespace

TEST(ModelFiles, FixturesLoadAndMatch) {
  auto s = adult_space();
  const std::vector<std::pair<std::string, Model>> cases{
      {"income_dl.json", income_dl(s)}, {"income_bt.json", income_bt(s)}, {"status_dl.json", status_dl(s)}};
  gen::Rng rng(8);
  for (const auto& [file, expected] : cases) {
    const Model m = load_model(kModels + file);
    EXPECT_EQ(*model_space(m), *s);
    EXPECT_EQ(model_classes(m), income_classes());
    expect_same_predictions(m, expected, rng, 400);
  }
  const Model bt = load_model(kModels + "income_bt.json");
  EXPECT_EQ(std::get<BoostedEnsemble>(bt).scores(husband_row(s)), std::vector<std::int64_t>{1642});
}

TEST(ModelFiles, LoadSaveIsByteStable) {
  for (const char* file : {"income_dl.json", "income_bt.json", "status_dl.json"}) {
    const std::string text = read_file(kModels + file);
    EXPECT_EQ(save_model(model_from_json(parse_json(text, file), file)), text) << file;
  }
}

TEST(ModelFiles, RandomModelsRoundTrip) {
  gen::Rng rng(31);
  for (int iter = 0; iter < 150; ++iter) {
    auto s = gen::bounded_space(rng, 6, 4, 100000);
    const Model m = gen::model(rng, s);
    const std::string once = save_model(m);
    const Model back = model_from_json(parse_json(once, "mem"), "mem");
    EXPECT_EQ(save_model(back), once);
    expect_same_predictions(m, back, rng, 30);
  }
}

TEST(ModelFiles, Errors) {
  auto load = [](const std::string& text) { return model_from_json(parse_json(text, "mem"), "mem"); };
  EXPECT_THROW(parse_json("{", "mem"), InputError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), InputError);

  Json dl = parse_json(read_file(kModels + "income_dl.json"), "dl");
  Json bad = dl;
  bad["format"] = "kbx-dl/9";
  EXPECT_THROW(load(bad.dump()), InputError);
  bad = dl;
  bad.erase("default");
  EXPECT_THROW(load(bad.dump()), InputError);
  bad = dl;
  bad["default"] = "maybe";
  EXPECT_THROW(load(bad.dump()), InputError);
  bad = dl;
  bad["rules"][0]["if"][0]["value"] = "PhD";
  EXPECT_THROW(load(bad.dump()), InputError);
  bad = dl;
  bad["rules"][0]["if"][0]["op"] = "<";
  EXPECT_THROW(load(bad.dump()), InputError);
  bad = dl;
  bad["features"][0]["values"] = Json::array({"x"});
  EXPECT_THROW(load(bad.dump()), InputError);

  Json bt = parse_json(read_file(kModels + "income_bt.json"), "bt");
  bad = bt;
  bad["score"] = "median";
  EXPECT_THROW(load(bad.dump()), InputError);
  bad = bt;
  bad["trees"][0][0]["yes"] = "leaf";
  EXPECT_THROW(load(bad.dump()), InputError);
  bad = bt;
  bad["trees"].push_back(bad["trees"][0]);
  EXPECT_THROW(load(bad.dump()), InputError);
}

TEST(RuleFiles, RoundTripPreservesRulesAndKnowledge) {
  const Dataset d = quantize(load_csv(KBX_SOURCE_DIR "/data/adult_simplified.csv"), {});
  ExtractionLimit lim;
  lim.max_antecedent = 2;
  const Extraction ex = extract_all(d, lim);
  const std::string text = rules_to_jsonl(d.space.get(), ex.rules, Json{{"command", "test"}});
  const RulesFile rf = rules_from_jsonl(text, "mem");
  ASSERT_EQ(rf.rules.size(), ex.rules.size());
  for (std::size_t i = 0; i < ex.rules.size(); ++i) {
    EXPECT_TRUE(rf.rules[i].same_logic(ex.rules[i]));
    EXPECT_EQ(rf.rules[i].id(), ex.rules[i].id());
    EXPECT_EQ(rf.rules[i].stats().support, ex.rules[i].stats().support);
  }
  const KnowledgeBase kb = rf.knowledge();
  ASSERT_EQ(kb.size(), ex.knowledge.size());
  for (const auto& c : ex.knowledge.clauses()) EXPECT_TRUE(kb.contains(c));
  EXPECT_EQ(rf.manifest["command"], "test");
  EXPECT_EQ(rules_to_jsonl(rf.space.get(), rf.rules, rf.manifest), text);
}

TEST(RuleFiles, EmptyAndBrokenFiles) {
  const RulesFile empty = rules_from_jsonl(rules_to_jsonl(nullptr, {}, Json::object()), "mem");
  EXPECT_FALSE(empty.space);
  EXPECT_TRUE(empty.knowledge().empty());
  EXPECT_THROW(rules_from_jsonl("", "mem"), InputError);
  EXPECT_THROW(rules_from_jsonl("{\"format\":\"kbx-dl/1\"}\n", "mem"), InputError);

  auto s = adult_space();
  const std::string head = rules_to_jsonl(s.get(), {}, Json::object());
  EXPECT_THROW(rules_from_jsonl(head + "{\"id\":0,\"if\":[],\"then\":{\"feature\":\"Age\",\"op\":\"=\",\"value\":\"1\"}}\n",
                                "mem"),
               InputError);
  // Consequent feature repeated in the antecedent.
  EXPECT_THROW(rules_from_jsonl(head +
                                    "{\"id\":0,\"if\":[{\"feature\":\"Sex\",\"op\":\"=\",\"value\":\"Male\"}],"
                                    "\"then\":{\"feature\":\"Sex\",\"op\":\"=\",\"value\":\"Female\"}}\n",
                                "mem"),
               InputError);
  const RulesFile rf = load_rules(kModels + "status_knowledge.jsonl");
  ASSERT_EQ(rf.rules.size(), 1U);
  EXPECT_EQ(rf.knowledge()[0], separated_rule_clause(s));
  EXPECT_THROW(knowledge_in_space(rf, *abc_space(), "mem"), InputError);
}

TEST(QuantizationSpecFiles, RoundTrip) {
  QuantizationSpec q{{{"hours", {40, 45.5}}, {"age", {30}}}};
  const Json j = qspec_to_json(q);
  const QuantizationSpec back = qspec_from_json(parse_json(j.dump(), "mem"), "mem");
  ASSERT_EQ(back.columns.size(), 2U);
  EXPECT_EQ(back.columns[0].cuts, (std::vector<double>{40, 45.5}));
  EXPECT_EQ(dump(qspec_to_json(back)), dump(j));
  Json bad = j;
  bad["columns"][0]["cuts"] = Json::array({5, 1});
  EXPECT_THROW(qspec_from_json(bad, "mem"), InputError);
}

TEST(Manifest, HashesAndDeterministicMode) {
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
  RunManifest m;
  m.command = "mine";
  m.inputs = {KBX_SOURCE_DIR "/data/adult_simplified.csv"};
  m.timings_ms["total"] = 1.5;
  const Json j = manifest_to_json(m);
  EXPECT_EQ(j["inputs"][0]["fnv1a"], hex64(fnv1a(read_file(m.inputs[0]))));
  EXPECT_TRUE(j.contains("timings_ms"));
  m.deterministic = true;
  EXPECT_FALSE(manifest_to_json(m).contains("timings_ms"));
}

TEST(SubsetFiles, PlainAndExplanationRecords) {
  auto s = adult_space();
  const std::string text =
      "{\"format\":\"kbx-subsets/1\"}\n"
      "{\"instance\":0,\"features\":[\"Sex\",\"Status\"]}\n"
      "{\"instance\":2,\"explanations\":[[\"Education\"],[]]}\n";
  const auto recs = subsets_from_jsonl(*s, text, "mem");
  ASSERT_EQ(recs.size(), 3U);
  EXPECT_EQ(recs[0].features, (FeatureSet{Status, Sex}));
  EXPECT_EQ(recs[1].instance, 2U);
  EXPECT_EQ(recs[1].features, (FeatureSet{Education}));
  EXPECT_TRUE(recs[2].features.empty());
  EXPECT_THROW(subsets_from_jsonl(*s, "{\"instance\":0,\"features\":[\"Salary\"]}\n", "mem"), InputError);
}
