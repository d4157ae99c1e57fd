#pragma once

// Versioned JSON file formats: models, rule files, quantization specs,
// explanation records and run manifests.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kbx/ingest.hpp"
#include "kbx/miner.hpp"
#include "kbx/models.hpp"

namespace kbx {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kDlFormat = "kbx-dl/1";
inline constexpr std::string_view kBtFormat = "kbx-bt/1";
inline constexpr std::string_view kRulesFormat = "kbx-rules/1";
inline constexpr std::string_view kQspecFormat = "kbx-qspec/1";
inline constexpr std::string_view kExplFormat = "kbx-expl/1";
inline constexpr std::string_view kSubsetsFormat = "kbx-subsets/1";
inline constexpr std::string_view kManifestFormat = "kbx-manifest/1";

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("write failed for '" + path + "'");
}

/// 64-bit FNV-1a, used to fingerprint manifest inputs.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << v;
  return s.str();
}

inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(source + ": invalid JSON: " + e.what());
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& source) {
  if (!j.is_object() || !j.contains(key)) throw InputError(source + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key, const std::string& source) {
  try {
    return field(j, key, source).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(source + ": bad field '" + key + "': " + e.what());
  }
}

inline void expect_format(const Json& j, std::string_view format, const std::string& source) {
  const auto f = get<std::string>(j, "format", source);
  if (f != format) throw InputError(source + ": expected format " + std::string(format) + ", found " + f);
}

}  // namespace detail

// Feature spaces and literals.

inline Json space_to_json(const FeatureSpace& s) {
  Json a = Json::array();
  for (const auto& f : s.features()) a.push_back({{"name", f.name}, {"values", f.values}});
  return a;
}

inline SpacePtr space_from_json(const Json& j, const std::string& source) {
  if (!j.is_array()) throw InputError(source + ": 'features' must be an array");
  std::vector<Feature> fs;
  for (const auto& f : j) {
    fs.push_back({detail::get<std::string>(f, "name", source), detail::get<std::vector<std::string>>(f, "values", source)});
  }
  try {
    return std::make_shared<const FeatureSpace>(std::move(fs));
  } catch (const Error& e) {
    throw InputError(source + ": " + e.what());
  }
}

inline Json literal_to_json(const FeatureSpace& s, const Literal& l) {
  return {{"feature", s[l.feature()].name}, {"op", l.is_equals() ? "=" : "!="}, {"value", s[l.feature()].values[l.value()]}};
}

inline Literal literal_from_json(const FeatureSpace& s, const Json& j, const std::string& source) {
  const auto name = detail::get<std::string>(j, "feature", source);
  const auto op = detail::get<std::string>(j, "op", source);
  const auto value = detail::get<std::string>(j, "value", source);
  const auto f = s.find(name);
  if (!f) throw InputError(source + ": unknown feature '" + name + "'");
  const auto v = s.find_value(*f, value);
  if (!v) throw InputError(source + ": unknown value '" + value + "' of feature '" + name + "'");
  if (op == "=") return Literal::equals(s, *f, *v);
  if (op == "!=") return Literal::not_equals(s, *f, *v);
  throw InputError(source + ": unknown literal operator '" + op + "'");
}

inline std::vector<Literal> literals_from_json(const FeatureSpace& s, const Json& j, const std::string& source) {
  if (!j.is_array()) throw InputError(source + ": literal list must be an array");
  std::vector<Literal> out;
  for (const auto& l : j) out.push_back(literal_from_json(s, l, source));
  return out;
}

inline ClassIndex class_from_label(const std::vector<std::string>& classes, const std::string& label,
                                   const std::string& source) {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) throw InputError(source + ": unknown class '" + label + "'");
  return static_cast<ClassIndex>(it - classes.begin());
}

// Models.

namespace detail {

inline Json node_to_json(const FeatureSpace& s, const Tree& t, std::size_t i) {
  const TreeNode& n = t.nodes()[i];
  if (n.is_leaf()) return n.weight;
  return {{"test", literal_to_json(s, *n.test)},
          {"yes", node_to_json(s, t, static_cast<std::size_t>(n.yes))},
          {"no", node_to_json(s, t, static_cast<std::size_t>(n.no))}};
}

inline int node_from_json(const FeatureSpace& s, const Json& j, std::vector<TreeNode>& nodes, const std::string& source,
                          int depth) {
  if (depth > 64) throw InputError(source + ": tree deeper than 64 levels");
  const int idx = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (j.is_number_integer()) {
    nodes[static_cast<std::size_t>(idx)].weight = j.get<std::int64_t>();
    return idx;
  }
  if (!j.is_object()) throw InputError(source + ": tree node must be an integer leaf or an object");
  const Literal test = literal_from_json(s, field(j, "test", source), source);
  const int yes = node_from_json(s, field(j, "yes", source), nodes, source, depth + 1);
  const int no = node_from_json(s, field(j, "no", source), nodes, source, depth + 1);
  auto& n = nodes[static_cast<std::size_t>(idx)];
  n.test = test;
  n.yes = yes;
  n.no = no;
  return idx;
}

}  // namespace detail

inline Json model_to_json(const DecisionList& dl) {
  const FeatureSpace& s = *dl.space();
  Json rules = Json::array();
  for (const auto& r : dl.rules()) {
    Json lits = Json::array();
    for (const auto& l : r.antecedent) lits.push_back(literal_to_json(s, l));
    rules.push_back({{"if", lits}, {"then", dl.classes()[r.cls]}});
  }
  return {{"format", kDlFormat},
          {"features", space_to_json(s)},
          {"classes", dl.classes()},
          {"rules", rules},
          {"default", dl.classes()[dl.default_class()]}};
}

inline Json model_to_json(const BoostedEnsemble& bt) {
  const FeatureSpace& s = *bt.space();
  Json groups = Json::array();
  for (const auto& g : bt.groups()) {
    Json trees = Json::array();
    for (const auto& t : g) trees.push_back(detail::node_to_json(s, t, 0));
    groups.push_back(trees);
  }
  return {{"format", kBtFormat},
          {"features", space_to_json(s)},
          {"classes", bt.classes()},
          {"score", bt.mode() == ScoreMode::SingleScore ? "single" : "per-class"},
          {"scale", bt.scale_digits()},
          {"trees", groups}};
}

inline Json model_to_json(const Model& m) {
  return std::visit([](const auto& x) { return model_to_json(x); }, m);
}

inline Model model_from_json(const Json& j, const std::string& source) {
  const auto format = detail::get<std::string>(j, "format", source);
  const SpacePtr space = space_from_json(detail::field(j, "features", source), source);
  const auto classes = detail::get<std::vector<std::string>>(j, "classes", source);
  try {
    if (format == kDlFormat) {
      std::vector<DlRule> rules;
      const Json& rs = detail::field(j, "rules", source);
      if (!rs.is_array()) throw InputError(source + ": 'rules' must be an array");
      for (const auto& r : rs) {
        rules.push_back({literals_from_json(*space, detail::field(r, "if", source), source),
                         class_from_label(classes, detail::get<std::string>(r, "then", source), source)});
      }
      const ClassIndex def = class_from_label(classes, detail::get<std::string>(j, "default", source), source);
      return DecisionList(space, classes, std::move(rules), def);
    }
    if (format == kBtFormat) {
      const auto score = detail::get<std::string>(j, "score", source);
      if (score != "single" && score != "per-class") throw InputError(source + ": unknown score mode '" + score + "'");
      const int digits = detail::get<int>(j, "scale", source);
      std::vector<std::vector<Tree>> groups;
      const Json& ts = detail::field(j, "trees", source);
      if (!ts.is_array()) throw InputError(source + ": 'trees' must be an array");
      for (const auto& g : ts) {
        if (!g.is_array()) throw InputError(source + ": each tree group must be an array");
        std::vector<Tree> trees;
        for (const auto& t : g) {
          std::vector<TreeNode> nodes;
          detail::node_from_json(*space, t, nodes, source, 0);
          trees.emplace_back(std::move(nodes));
        }
        groups.push_back(std::move(trees));
      }
      return BoostedEnsemble(space, classes, score == "single" ? ScoreMode::SingleScore : ScoreMode::PerClass, digits,
                             std::move(groups));
    }
  } catch (const StructuralError& e) {
    throw InputError(source + ": " + e.what());
  }
  throw InputError(source + ": unknown model format '" + format + "'");
}

inline std::string save_model(const Model& m) { return dump(model_to_json(m)); }

inline Model load_model(const std::string& path) { return model_from_json(parse_json(read_file(path), path), path); }

// Quantization specs.

inline Json qspec_to_json(const QuantizationSpec& q) {
  Json cols = Json::array();
  for (const auto& c : q.columns) cols.push_back({{"name", c.name}, {"cuts", c.cuts}});
  return {{"format", kQspecFormat}, {"columns", cols}};
}

inline QuantizationSpec qspec_from_json(const Json& j, const std::string& source) {
  detail::expect_format(j, kQspecFormat, source);
  QuantizationSpec q;
  for (const auto& c : detail::field(j, "columns", source)) {
    q.columns.push_back({detail::get<std::string>(c, "name", source), detail::get<std::vector<double>>(c, "cuts", source)});
    validate_column(q.columns.back());
  }
  return q;
}

inline QuantizationSpec load_qspec(const std::string& path) {
  return qspec_from_json(parse_json(read_file(path), path), path);
}

// Run manifests.

struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::vector<std::string> inputs;
  std::map<std::string, std::uint64_t> seeds;
  Json limits = Json::object();
  std::vector<std::string> formats;
  std::map<std::string, double> timings_ms;
  bool deterministic = false;
  bool truncated = false;
  Json notes = Json::object();
};

inline Json manifest_to_json(const RunManifest& m) {
  Json inputs = Json::array();
  for (const auto& p : m.inputs) {
    std::string bytes;
    try {
      bytes = read_file(p);
    } catch (const InputError&) {
    }
    inputs.push_back({{"path", p}, {"fnv1a", hex64(fnv1a(bytes))}});
  }
  Json j = {{"format", kManifestFormat}, {"command", m.command}, {"args", m.args},       {"inputs", inputs},
            {"seeds", m.seeds},          {"limits", m.limits},   {"formats", m.formats}, {"truncated", m.truncated}};
  if (!m.notes.empty()) j["notes"] = m.notes;
  if (!m.deterministic) j["timings_ms"] = m.timings_ms;
  return j;
}

// Rule files: a header line followed by one JSON object per rule.

inline Json rule_to_json(const FeatureSpace& s, const Rule& r) {
  Json lits = Json::array();
  for (const auto& l : r.antecedent()) lits.push_back(literal_to_json(s, l));
  return {{"id", r.id()},
          {"if", lits},
          {"then", literal_to_json(s, r.consequent())},
          {"support", r.stats().support},
          {"consistency", r.stats().consistency},
          {"size", r.size()}};
}

inline std::string rules_to_jsonl(const FeatureSpace* s, std::span<const Rule> rules, const Json& manifest) {
  std::string out = Json{{"format", kRulesFormat},
                         {"features", s ? space_to_json(*s) : Json::array()},
                         {"rules", rules.size()},
                         {"manifest", manifest}}
                        .dump() +
                    "\n";
  for (const auto& r : rules) out += rule_to_json(*s, r).dump() + "\n";
  return out;
}

struct RulesFile {
  SpacePtr space;  // null for an empty file with no features
  std::vector<Rule> rules;
  Json manifest;

  KnowledgeBase knowledge() const { return space ? knowledge_from_rules(*space, rules) : KnowledgeBase{}; }
};

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

inline RulesFile rules_from_jsonl(const std::string& text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError(source + ": empty rules file");
  const Json head = parse_json(lines[0], source + ":1");
  detail::expect_format(head, kRulesFormat, source);
  RulesFile rf;
  rf.manifest = head.value("manifest", Json::object());
  const Json& fs = detail::field(head, "features", source);
  if (!fs.empty()) rf.space = space_from_json(fs, source);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = source + ":" + std::to_string(i + 1);
    if (!rf.space) throw InputError(where + ": rule in a file without features");
    const Json j = parse_json(lines[i], where);
    RuleStats st;
    st.support = j.value("support", std::size_t{0});
    st.consistency = j.value("consistency", 1.0);
    try {
      rf.rules.emplace_back(*rf.space, literals_from_json(*rf.space, detail::field(j, "if", where), where),
                            literal_from_json(*rf.space, detail::field(j, "then", where), where),
                            detail::get<int>(j, "id", where), st);
    } catch (const PreconditionError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return rf;
}

inline RulesFile load_rules(const std::string& path) { return rules_from_jsonl(read_file(path), path); }

/// Knowledge over `target`, whose features must match the rule file's by name and domain.
inline KnowledgeBase knowledge_in_space(const RulesFile& rf, const FeatureSpace& target, const std::string& source) {
  if (!rf.space) return {};
  if (!(*rf.space == target)) throw InputError(source + ": rule features do not match the model's features");
  return rf.knowledge();
}

// Explanation records.

inline Json feature_names(const FeatureSpace& s, const FeatureSet& set) {
  Json a = Json::array();
  for (auto f : set) a.push_back(s[f].name);
  return a;
}

inline FeatureSet features_from_names(const FeatureSpace& s, const Json& names, const std::string& source) {
  if (!names.is_array()) throw InputError(source + ": feature list must be an array");
  FeatureSet out;
  for (const auto& n : names) {
    if (!n.is_string()) throw InputError(source + ": feature names must be strings");
    const auto f = s.find(n.get<std::string>());
    if (!f) throw InputError(source + ": unknown feature '" + n.get<std::string>() + "'");
    out.push_back(*f);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct SubsetRecord {
  std::size_t instance = 0;
  FeatureSet features;
};

/// Reads feature-subset records: either plain `{"instance", "features"}` lines or
/// explanation records, each of whose explanations becomes one subset.
inline std::vector<SubsetRecord> subsets_from_jsonl(const FeatureSpace& s, const std::string& text,
                                                    const std::string& source) {
  std::vector<SubsetRecord> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = source + ":" + std::to_string(i + 1);
    const Json j = parse_json(lines[i], where);
    if (j.contains("format")) continue;
    const auto inst = detail::get<std::size_t>(j, "instance", where);
    if (j.contains("features")) {
      out.push_back({inst, features_from_names(s, j.at("features"), where)});
    } else {
      for (const auto& e : detail::field(j, "explanations", where)) {
        out.push_back({inst, features_from_names(s, e, where)});
      }
    }
  }
  return out;
}

}  // namespace kbx
