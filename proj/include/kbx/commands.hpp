#pragma once

// Command implementations behind the `kbx` executable. Each command reads its
// inputs, writes versioned output files and prints a plain-text table.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <thread>

#include "kbx/explain.hpp"
#include "kbx/serialize.hpp"
#include "kbx/train.hpp"

namespace kbx {

/// Bad flag values or flag combinations (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 1;
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
      dynamic_cast<const StructuralError*>(&e)) {
    return 2;
  }
  return 3;
}

inline std::size_t default_jobs() {
  if (const char* env = std::getenv("KBX_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw UsageError("KBX_JOBS must be a positive integer");
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

struct DataOptions {
  std::string path;
  std::string class_column;
  bool no_class = false;
  std::string qspec;
  std::vector<std::string> numeric;
  std::vector<std::string> categorical;

  SchemaHints hints() const {
    SchemaHints h;
    h.class_column = class_column;
    h.has_class = !no_class;
    h.numeric = numeric;
    h.categorical = categorical;
    return h;
  }
};

inline LoadedTable load_table(const DataOptions& o) { return load_csv(o.path, o.hints()); }

inline QuantizationSpec load_optional_qspec(const DataOptions& o) {
  return o.qspec.empty() ? QuantizationSpec{} : load_qspec(o.qspec);
}

inline Dataset load_dataset(const DataOptions& o) { return quantize(load_table(o), load_optional_qspec(o)); }

/// Rows read into the model's space, with class labels in the model's order.
inline Dataset dataset_for_model(const DataOptions& o, const Model& m) {
  const QuantizationSpec q = load_optional_qspec(o);
  return dataset_in_space(load_table(o), model_space(m), &q, &model_classes(m));
}

inline void check_intervals(std::size_t q, bool force) {
  if (!force && (q < 4 || q > 6)) throw UsageError("--intervals must be 4, 5 or 6 (use --force to override)");
  if (q < 2) throw UsageError("--intervals must be at least 2");
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string fixed_str(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

/// Column-aligned text table.
inline void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) line += "  ";
      line += i == 0 ? r[i] + std::string(width[i] - r[i].size(), ' ') : std::string(width[i] - r[i].size(), ' ') + r[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
}

// quantize

struct QuantizeOptions {
  DataOptions data;
  std::size_t intervals = 6;
  bool force = false;
  std::string out_prefix;
};

inline int cmd_quantize(const QuantizeOptions& o, RunManifest man, std::ostream& out) {
  check_intervals(o.intervals, o.force);
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedTable t = load_table(o.data);
  const QuantizationSpec spec = fit_quantization(t, o.intervals);
  const Dataset d = quantize(t, spec);
  std::ostringstream csv;
  write_csv(csv, to_csv_table(d));
  write_file(o.out_prefix + ".csv", csv.str());
  man.inputs = {o.data.path};
  man.limits = {{"intervals", o.intervals}};
  man.formats = {std::string(kQspecFormat), std::string(kManifestFormat)};
  man.timings_ms["total"] = elapsed_ms(t0);
  const Json mj = manifest_to_json(man);
  Json qj = qspec_to_json(spec);
  qj["manifest"] = mj;
  write_file(o.out_prefix + ".qspec.json", dump(qj));
  write_file(o.out_prefix + ".manifest.json", dump(mj));
  std::vector<std::vector<std::string>> rows{{"feature", "values", "quantized"}};
  for (std::size_t f = 0; f < d.space->size(); ++f) {
    rows.push_back({(*d.space)[f].name, std::to_string(d.space->domain_size(f)),
                    spec.find((*d.space)[f].name) ? "yes" : "no"});
  }
  print_table(out, rows);
  out << d.size() << " rows written to " << o.out_prefix << ".csv\n";
  return 0;
}

// mine

struct MineOptions {
  DataOptions data;
  std::size_t max_size = 5;
  std::size_t min_support = 1;
  std::optional<std::size_t> max_rules;
  std::optional<long> time_ms;
  std::string engine = "lattice";
  std::size_t jobs = 1;
  std::string out;
};

inline ExtractionLimit make_limit(std::size_t max_size, std::size_t min_support, std::optional<std::size_t> max_rules,
                                  std::optional<long> time_ms) {
  ExtractionLimit l;
  l.max_antecedent = max_size;
  l.min_support = min_support;
  l.max_rules = max_rules;
  if (time_ms) l.time_budget = std::chrono::milliseconds(*time_ms);
  try {
    l.validate();
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  return l;
}

inline Json limit_json(const ExtractionLimit& l) {
  Json j = {{"max_size", l.max_antecedent}, {"min_support", l.min_support}};
  j["max_rules"] = l.max_rules ? Json(*l.max_rules) : Json(nullptr);
  j["time_ms"] = l.time_budget ? Json(l.time_budget->count()) : Json(nullptr);
  return j;
}

inline int cmd_mine(const MineOptions& o, RunManifest man, std::ostream& out) {
  if (o.engine != "lattice" && o.engine != "eclat") throw UsageError("--engine must be lattice or eclat");
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  const ExtractionLimit limit = make_limit(o.max_size, o.min_support, o.max_rules, o.time_ms);
  const auto t0 = std::chrono::steady_clock::now();
  man.inputs = {o.data.path};
  if (!o.data.qspec.empty()) man.inputs.push_back(o.data.qspec);
  man.limits = limit_json(limit);
  man.limits["engine"] = o.engine;
  man.formats = {std::string(kRulesFormat)};

  const LoadedTable t = load_table(o.data);
  if (t.row_count() == 0) {
    man.timings_ms["total"] = elapsed_ms(t0);
    write_file(o.out, rules_to_jsonl(nullptr, {}, manifest_to_json(man)));
    out << "0 rows: wrote an empty rules file\n";
    return 0;
  }
  const Dataset d = quantize(t, load_optional_qspec(o.data));
  std::vector<Rule> rules;
  if (o.engine == "lattice") {
    Extraction ex = o.jobs > 1 ? extract_all_parallel(d, limit, o.jobs) : extract_all(d, limit);
    rules = std::move(ex.rules);
    man.truncated = ex.truncated;
  } else {
    rules = eclat_mine(d, limit.min_support, limit.max_antecedent);
    if (limit.max_rules && rules.size() > *limit.max_rules) {
      rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(*limit.max_rules), rules.end());
      man.truncated = true;
    }
  }
  man.timings_ms["total"] = elapsed_ms(t0);
  write_file(o.out, rules_to_jsonl(d.space.get(), rules, manifest_to_json(man)));

  std::vector<std::vector<std::string>> rows{{"size", "rules"}};
  std::map<std::size_t, std::size_t> by_size;
  for (const auto& r : rules) ++by_size[r.size()];
  for (const auto& [k, n] : by_size) rows.push_back({std::to_string(k), std::to_string(n)});
  rows.push_back({"all", std::to_string(rules.size())});
  print_table(out, rows);
  if (man.truncated) out << "extraction stopped at a limit\n";
  return 0;
}

// xval-rules

struct XvalOptions {
  DataOptions data;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  std::size_t intervals = 6;
  bool force = false;
  std::size_t max_size = 5;
  std::size_t min_support = 1;
  std::optional<std::size_t> max_rules;
  std::optional<long> time_ms;
  bool resubstitution = false;
  std::string out;
};

struct XvalReport {
  std::size_t max_size = 0;
  /// Per fold: mean accuracy per antecedent size (index 0 unused) and overall.
  std::vector<std::vector<std::optional<double>>> per_size;
  std::vector<std::optional<double>> overall;
  std::vector<std::size_t> rule_counts;
  bool truncated = false;

  static std::optional<double> mean(const std::vector<std::optional<double>>& v) {
    double s = 0;
    std::size_t n = 0;
    for (const auto& x : v) {
      if (x) {
        s += *x;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
  }
  std::optional<double> mean_overall() const { return mean(overall); }
  std::optional<double> mean_of_size(std::size_t k) const {
    std::vector<std::optional<double>> v;
    for (const auto& f : per_size) v.push_back(f[k]);
    return mean(v);
  }
};

/// k-fold rule accuracy: quantization is fitted and rules are mined on each
/// training part, then every rule is scored on the held-out part.
inline XvalReport cross_validate_rules(const LoadedTable& t, std::size_t k, std::uint64_t seed, std::size_t intervals,
                                       const ExtractionLimit& limit, bool resubstitution = false) {
  XvalReport rep;
  rep.max_size = limit.max_antecedent;
  auto parts = fold_indices(t.row_count(), k, seed);
  for (auto& p : parts) {
    if (resubstitution) p.test = p.train;
    const QuantizationSpec spec = fit_quantization(t, intervals, p.train);
    const Dataset all = quantize(t, spec);
    const Dataset train = all.subset(p.train).without_class();
    const Dataset test = all.subset(p.test).without_class();
    const Extraction ex = extract_all(train, limit);
    rep.truncated = rep.truncated || ex.truncated;
    std::vector<double> sum(limit.max_antecedent + 1, 0.0);
    std::vector<std::size_t> cnt(limit.max_antecedent + 1, 0);
    double total = 0;
    const auto acc = rule_accuracies(ex.rules, test);
    for (std::size_t i = 0; i < ex.rules.size(); ++i) {
      const Rule& r = ex.rules[i];
      const double a = acc[i];
      sum[r.size()] += a;
      ++cnt[r.size()];
      total += a;
    }
    std::vector<std::optional<double>> row(limit.max_antecedent + 1);
    for (std::size_t s = 1; s <= limit.max_antecedent; ++s) {
      if (cnt[s]) row[s] = sum[s] / static_cast<double>(cnt[s]);
    }
    rep.per_size.push_back(std::move(row));
    rep.overall.push_back(ex.rules.empty() ? std::nullopt
                                           : std::optional<double>(total / static_cast<double>(ex.rules.size())));
    rep.rule_counts.push_back(ex.rules.size());
  }
  return rep;
}

inline int cmd_xval_rules(const XvalOptions& o, RunManifest man, std::ostream& out) {
  check_intervals(o.intervals, o.force);
  if (o.folds < 2) throw UsageError("--folds must be at least 2");
  const ExtractionLimit limit = make_limit(o.max_size, o.min_support, o.max_rules, o.time_ms);
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedTable t = load_table(o.data);
  const XvalReport rep = cross_validate_rules(t, o.folds, o.seed, o.intervals, limit, o.resubstitution);

  auto cell = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  auto text = [](const std::optional<double>& v) { return v ? fixed_str(*v) : std::string("-"); };
  std::vector<std::string> columns;
  for (std::size_t s = 1; s <= o.max_size; ++s) columns.push_back("rule" + std::to_string(s));
  columns.push_back("rule_all");

  Json folds = Json::array();
  std::vector<std::vector<std::string>> rows{{"fold"}};
  for (const auto& c : columns) rows[0].push_back(c);
  rows[0].push_back("rules");
  for (std::size_t i = 0; i < rep.overall.size(); ++i) {
    Json f = Json::object();
    std::vector<std::string> r{std::to_string(i + 1)};
    for (std::size_t s = 1; s <= o.max_size; ++s) {
      f[columns[s - 1]] = cell(rep.per_size[i][s]);
      r.push_back(text(rep.per_size[i][s]));
    }
    f["rule_all"] = cell(rep.overall[i]);
    f["rules"] = rep.rule_counts[i];
    r.push_back(text(rep.overall[i]));
    r.push_back(std::to_string(rep.rule_counts[i]));
    folds.push_back(f);
    rows.push_back(std::move(r));
  }
  Json mean = Json::object();
  std::vector<std::string> r{"mean"};
  for (std::size_t s = 1; s <= o.max_size; ++s) {
    mean[columns[s - 1]] = cell(rep.mean_of_size(s));
    r.push_back(text(rep.mean_of_size(s)));
  }
  mean["rule_all"] = cell(rep.mean_overall());
  r.push_back(text(rep.mean_overall()));
  r.push_back("");
  rows.push_back(std::move(r));

  man.inputs = {o.data.path};
  man.seeds["folds"] = o.seed;
  man.limits = limit_json(limit);
  man.limits["folds"] = o.folds;
  man.limits["intervals"] = o.intervals;
  man.limits["resubstitution"] = o.resubstitution;
  man.formats = {"kbx-xval/1"};
  man.truncated = rep.truncated;
  man.timings_ms["total"] = elapsed_ms(t0);
  const Json report = {{"format", "kbx-xval/1"}, {"columns", columns}, {"folds", folds}, {"mean", mean},
                       {"manifest", manifest_to_json(man)}};
  if (!o.out.empty()) write_file(o.out, dump(report));
  print_table(out, rows);
  return 0;
}

// explain

struct ExplainOptions {
  std::string model;
  DataOptions data;
  std::string kind = "axp";
  std::string knowledge;
  std::size_t enumerate = 20;
  std::string instances = "test";
  double test_fraction = 0.2;
  std::uint64_t seed = 1;
  bool compare = false;
  bool deterministic = false;
  std::size_t jobs = 1;
  std::string out;
};

inline ExplanationKind parse_kind(const std::string& k) {
  if (k == "axp") return ExplanationKind::Axp;
  if (k == "cxp") return ExplanationKind::Cxp;
  throw UsageError("--kind must be axp or cxp");
}

/// Instance selection: "all", "test" (the held-out part of a seeded split) or a
/// comma-separated list of row indices.
inline std::vector<std::size_t> select_instances(const std::string& spec, std::size_t rows, double test_fraction,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (spec == "all") {
    for (std::size_t i = 0; i < rows; ++i) out.push_back(i);
    return out;
  }
  if (spec == "test") {
    if (rows < 2) throw InputError("a train/test split needs at least two rows");
    out = split_indices(rows, 1.0 - test_fraction, seed).test;
    std::sort(out.begin(), out.end());
    return out;
  }
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) throw UsageError("--instances: '" + item + "' is not a row index");
    if (v >= rows) throw InputError("--instances: row " + item + " is out of range (" + std::to_string(rows) + " rows)");
    out.push_back(v);
  }
  return out;
}

struct ExplainRun {
  Enumeration result;
  std::size_t oracle_calls = 0;
  double ms = 0;
};

struct InstanceExplanations {
  std::size_t row = 0;
  ClassIndex predicted = 0;
  bool skipped = false;
  std::optional<ExplainRun> plain;
  std::optional<ExplainRun> assisted;
};

inline ExplainRun run_enumeration(Oracle& oracle, const Instance& v, ClassIndex c, const KnowledgeBase* kb,
                                  ExplanationKind kind, std::size_t n) {
  oracle.reset_calls();
  const auto t0 = std::chrono::steady_clock::now();
  ExplainContext ctx{oracle, v, c, kb};
  ExplainRun r{enumerate_smallest(ctx, kind, n), 0, 0};
  r.ms = elapsed_ms(t0);
  r.oracle_calls = oracle.calls();
  return r;
}

/// Explains each selected row; rows run on up to `jobs` threads and the result
/// order follows `rows`.
inline std::vector<InstanceExplanations> explain_rows(const Model& m, const Dataset& d,
                                                      const std::vector<std::size_t>& rows, const KnowledgeBase* kb,
                                                      bool plain, ExplanationKind kind, std::size_t n,
                                                      std::size_t jobs) {
  std::vector<InstanceExplanations> results(rows.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    Oracle oracle(m);
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        auto& r = results[i];
        r.row = rows[i];
        const Instance& v = d.rows[rows[i]];
        r.predicted = classify(m, v);
        if (kb && !kb->satisfied(v)) {
          r.skipped = true;
          continue;
        }
        if (plain) r.plain = run_enumeration(oracle, v, r.predicted, nullptr, kind, n);
        if (kb) r.assisted = run_enumeration(oracle, v, r.predicted, kb, kind, n);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = rows.size();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t j = 1; j < std::min(jobs, rows.size()); ++j) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

struct SizeSummary {
  std::size_t instances = 0;
  double avg_smallest = 0;
  double avg_count = 0;
  double avg_calls = 0;
  double avg_ms = 0;
};

/// Averages over instances where every requested run found an explanation.
inline std::pair<SizeSummary, SizeSummary> summarize(const std::vector<InstanceExplanations>& rs) {
  SizeSummary p, a;
  for (const auto& r : rs) {
    if (r.skipped) continue;
    if ((r.plain && r.plain->result.explanations.empty()) || (r.assisted && r.assisted->result.explanations.empty())) {
      continue;
    }
    auto add = [](SizeSummary& s, const ExplainRun& run) {
      ++s.instances;
      s.avg_smallest += static_cast<double>(run.result.explanations.front().size());
      s.avg_count += static_cast<double>(run.result.explanations.size());
      s.avg_calls += static_cast<double>(run.oracle_calls);
      s.avg_ms += run.ms;
    };
    if (r.plain) add(p, *r.plain);
    if (r.assisted) add(a, *r.assisted);
  }
  for (SizeSummary* s : {&p, &a}) {
    if (s->instances == 0) continue;
    const auto n = static_cast<double>(s->instances);
    s->avg_smallest /= n;
    s->avg_count /= n;
    s->avg_calls /= n;
    s->avg_ms /= n;
  }
  return {p, a};
}

inline Json explanation_record(const FeatureSpace& s, const InstanceExplanations& r, const ExplainRun& run,
                               const std::vector<std::string>& classes, ExplanationKind kind, bool knowledge,
                               bool deterministic) {
  Json ex = Json::array();
  Json sizes = Json::array();
  for (const auto& e : run.result.explanations) {
    ex.push_back(feature_names(s, e));
    sizes.push_back(e.size());
  }
  Json j = {{"instance", r.row},
            {"prediction", classes[r.predicted]},
            {"kind", to_string(kind)},
            {"knowledge", knowledge},
            {"explanations", ex},
            {"sizes", sizes},
            {"exhausted", run.result.exhausted},
            {"oracle_calls", run.oracle_calls}};
  if (!deterministic) j["time_ms"] = run.ms;
  return j;
}

inline int cmd_explain(const ExplainOptions& o, RunManifest man, std::ostream& out, std::ostream& log = std::cerr) {
  const ExplanationKind kind = parse_kind(o.kind);
  if (o.compare && o.knowledge.empty()) throw UsageError("--compare needs --knowledge");
  if (o.enumerate < 1) throw UsageError("--enum must be at least 1");
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  if (!(o.test_fraction > 0 && o.test_fraction < 1)) throw UsageError("--test-fraction must be in (0, 1)");
  const auto t0 = std::chrono::steady_clock::now();
  const Model m = load_model(o.model);
  const Dataset d = dataset_for_model(o.data, m);
  const FeatureSpace& s = *model_space(m);
  std::optional<KnowledgeBase> kb;
  if (!o.knowledge.empty()) kb = knowledge_in_space(load_rules(o.knowledge), s, o.knowledge);
  const auto rows = select_instances(o.instances, d.size(), o.test_fraction, o.seed);
  const bool plain = !kb || o.compare;
  const auto results = explain_rows(m, d, rows, kb ? &*kb : nullptr, plain, kind, o.enumerate, o.jobs);

  man.inputs = {o.model, o.data.path};
  if (!o.data.qspec.empty()) man.inputs.push_back(o.data.qspec);
  if (kb) man.inputs.push_back(o.knowledge);
  man.seeds["split"] = o.seed;
  man.limits = {{"enum", o.enumerate}, {"kind", o.kind}, {"instances", o.instances}, {"test_fraction", o.test_fraction}};
  man.formats = {std::string(kExplFormat)};
  man.deterministic = o.deterministic;

  std::size_t skipped = 0;
  std::string body;
  for (const auto& r : results) {
    if (r.skipped) {
      ++skipped;
      body += Json{{"instance", r.row}, {"skipped", "incompatible with the knowledge"}}.dump() + "\n";
      continue;
    }
    if (r.plain) body += explanation_record(s, r, *r.plain, model_classes(m), kind, false, o.deterministic).dump() + "\n";
    if (r.assisted) {
      body += explanation_record(s, r, *r.assisted, model_classes(m), kind, true, o.deterministic).dump() + "\n";
    }
  }
  if (skipped) log << "skipped " << skipped << " instance(s) incompatible with the knowledge\n";
  const auto [p, a] = summarize(results);
  man.timings_ms["total"] = elapsed_ms(t0);
  const Json mj = manifest_to_json(man);

  auto summary_json = [&](const SizeSummary& x) {
    Json j = {{"instances", x.instances},
              {"avg_smallest", x.avg_smallest},
              {"avg_count", x.avg_count},
              {"avg_oracle_calls", x.avg_calls}};
    if (!o.deterministic) j["avg_time_ms"] = x.avg_ms;
    return j;
  };
  Json summary = {{"format", "kbx-expl-summary/1"}, {"kind", o.kind}, {"selected", rows.size()}, {"skipped", skipped}};
  if (plain) summary["without_knowledge"] = summary_json(p);
  if (kb) summary["with_knowledge"] = summary_json(a);
  summary["manifest"] = mj;

  if (!o.out.empty()) {
    write_file(o.out, Json{{"format", kExplFormat}, {"manifest", mj}}.dump() + "\n" + body);
    write_file(o.out + ".summary.json", dump(summary));
  } else {
    out << body;
  }
  std::vector<std::vector<std::string>> table{{"run", "instances", "avg smallest", "avg count", "avg calls"}};
  auto row = [&](const std::string& name, const SizeSummary& x) {
    table.push_back({name, std::to_string(x.instances), fixed_str(x.avg_smallest, 2), fixed_str(x.avg_count, 2),
                     fixed_str(x.avg_calls, 1)});
  };
  if (plain) row("without knowledge", p);
  if (kb) row("with knowledge", a);
  print_table(out, table);
  if (skipped) out << skipped << " instance(s) skipped\n";
  return 0;
}

// attribute

struct AttributeOptions {
  std::string model;
  std::string knowledge;
  std::string instance_json;
  DataOptions data;
  std::optional<std::size_t> row;
  std::string axp;
  std::string out;
};

inline Instance instance_from_json(const FeatureSpace& s, const std::string& text) {
  const Json j = parse_json(text, "--instance");
  if (!j.is_object()) throw InputError("--instance must be a JSON object of feature: value");
  std::vector<ValueIndex> vals(s.size());
  std::vector<bool> seen(s.size(), false);
  for (const auto& [name, value] : j.items()) {
    const auto f = s.find(name);
    if (!f) throw InputError("--instance: unknown feature '" + name + "'");
    if (!value.is_string()) throw InputError("--instance: value of '" + name + "' must be a string");
    const auto v = s.find_value(*f, value.get<std::string>());
    if (!v) throw InputError("--instance: unknown value '" + value.get<std::string>() + "' of '" + name + "'");
    vals[*f] = *v;
    seen[*f] = true;
  }
  for (std::size_t f = 0; f < s.size(); ++f) {
    if (!seen[f]) throw InputError("--instance: missing feature '" + s[f].name + "'");
  }
  return Instance(std::move(vals));
}

inline FeatureSet features_from_list(const FeatureSpace& s, const std::string& list) {
  Json names = Json::array();
  std::istringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) names.push_back(item);
  }
  return features_from_names(s, names, "--axp");
}

inline Instance resolve_instance(const Model& m, const std::string& instance_json, const DataOptions& data,
                                 std::optional<std::size_t> row) {
  if (!instance_json.empty() == (row.has_value() && !data.path.empty())) {
    throw UsageError("give either --instance or both --data and --row");
  }
  if (!instance_json.empty()) return instance_from_json(*model_space(m), instance_json);
  const Dataset d = dataset_for_model(data, m);
  if (*row >= d.size()) throw InputError("--row " + std::to_string(*row) + " is out of range");
  return d.rows[*row];
}

inline int cmd_attribute(const AttributeOptions& o, RunManifest man, std::ostream& out) {
  const Model m = load_model(o.model);
  const FeatureSpace& s = *model_space(m);
  const RulesFile rf = load_rules(o.knowledge);
  const KnowledgeBase kb = knowledge_in_space(rf, s, o.knowledge);
  const Instance v = resolve_instance(m, o.instance_json, o.data, o.row);
  if (!kb.satisfied(v)) throw PreconditionError("the instance is incompatible with the knowledge");
  Oracle oracle(m);
  ExplainContext ctx{oracle, v, classify(m, v), &kb};
  FeatureSet axp;
  if (o.axp.empty()) {
    axp = enumerate_smallest(ctx, ExplanationKind::Axp, 1).explanations.at(0);
  } else {
    axp = features_from_list(s, o.axp);
  }
  const auto used = attribute_rules(ctx, axp);

  std::map<int, const Rule*> by_id;
  for (const auto& r : rf.rules) by_id[r.id()] = &r;
  Json clauses = Json::array();
  out << "prediction: " << model_classes(m)[ctx.predicted] << "\n";
  out << "AXp: " << to_string(s, axp) << "\n";
  if (used.empty()) out << "no background knowledge is needed\n";
  for (auto pos : used) {
    Json ids = Json::array();
    Json texts = Json::array();
    out << "clause " << to_string(s, kb[pos]) << "\n";
    for (int id : kb.provenance(pos)) {
      ids.push_back(id);
      auto it = by_id.find(id);
      const std::string text = it == by_id.end() ? std::string("?") : to_string(s, *it->second);
      texts.push_back(text);
      out << "  rule " << id << ": " << text << "\n";
    }
    clauses.push_back({{"clause", to_string(s, kb[pos])}, {"rule_ids", ids}, {"rules", texts}});
  }
  if (!o.out.empty()) {
    man.inputs = {o.model, o.knowledge};
    if (!o.data.path.empty()) man.inputs.push_back(o.data.path);
    man.formats = {"kbx-attribution/1"};
    man.deterministic = true;
    Json inst = Json::object();
    for (std::size_t f = 0; f < s.size(); ++f) inst[s[f].name] = s[f].values[v[f]];
    write_file(o.out, dump({{"format", "kbx-attribution/1"},
                            {"instance", inst},
                            {"prediction", model_classes(m)[ctx.predicted]},
                            {"axp", feature_names(s, axp)},
                            {"knowledge_needed", !used.empty()},
                            {"clauses", clauses},
                            {"manifest", manifest_to_json(man)}}));
  }
  return 0;
}

// assess

struct AssessOptions {
  std::string model;
  DataOptions data;
  std::string subsets;
  std::string kind = "axp";
  std::string knowledge;
  std::string out;
};

struct AssessSummary {
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::size_t correct_plain = 0;
  std::size_t correct_assisted = 0;
};

inline int cmd_assess(const AssessOptions& o, RunManifest man, std::ostream& out) {
  const ExplanationKind kind = parse_kind(o.kind);
  const Model m = load_model(o.model);
  const FeatureSpace& s = *model_space(m);
  const Dataset d = dataset_for_model(o.data, m);
  std::optional<KnowledgeBase> kb;
  if (!o.knowledge.empty()) kb = knowledge_in_space(load_rules(o.knowledge), s, o.knowledge);
  const auto records = subsets_from_jsonl(s, read_file(o.subsets), o.subsets);
  Oracle oracle(m);
  AssessSummary sum;
  Json items = Json::array();
  for (const auto& rec : records) {
    if (rec.instance >= d.size()) throw InputError(o.subsets + ": instance " + std::to_string(rec.instance) + " out of range");
    const Instance& v = d.rows[rec.instance];
    const ClassIndex c = classify(m, v);
    if (kb && !kb->satisfied(v)) {
      ++sum.skipped;
      continue;
    }
    ++sum.records;
    ExplainContext plain{oracle, v, c, nullptr};
    const bool ok_plain = check_explanation(plain, rec.features, kind);
    sum.correct_plain += ok_plain;
    Json item = {{"instance", rec.instance}, {"features", feature_names(s, rec.features)}, {"size", rec.features.size()},
                 {"correct_without_knowledge", ok_plain}};
    ExplainContext ctx{oracle, v, c, kb ? &*kb : nullptr};
    bool ok = ok_plain;
    if (kb) {
      ok = check_explanation(ctx, rec.features, kind);
      sum.correct_assisted += ok;
      item["correct_with_knowledge"] = ok;
    }
    if (ok) {
      const FeatureSet red = reduce_explanation(ctx, rec.features, kind);
      item["reduced"] = feature_names(s, red);
      item["reduced_size"] = red.size();
    } else {
      item["reduced"] = nullptr;
      item["reduced_size"] = nullptr;
    }
    items.push_back(item);
  }
  auto pct = [&](std::size_t k) { return sum.records ? 100.0 * static_cast<double>(k) / static_cast<double>(sum.records) : 0.0; };
  man.inputs = {o.model, o.data.path, o.subsets};
  if (kb) man.inputs.push_back(o.knowledge);
  man.formats = {"kbx-assess/1"};
  man.deterministic = true;
  Json report = {{"format", "kbx-assess/1"}, {"kind", o.kind},           {"records", sum.records},
                 {"skipped", sum.skipped},   {"percent_correct_without_knowledge", pct(sum.correct_plain)}};
  if (kb) report["percent_correct_with_knowledge"] = pct(sum.correct_assisted);
  report["items"] = items;
  report["manifest"] = manifest_to_json(man);
  if (!o.out.empty()) write_file(o.out, dump(report));
  std::vector<std::vector<std::string>> table{{"run", "records", "% correct"}};
  table.push_back({"without knowledge", std::to_string(sum.records), fixed_str(pct(sum.correct_plain), 2)});
  if (kb) table.push_back({"with knowledge", std::to_string(sum.records), fixed_str(pct(sum.correct_assisted), 2)});
  print_table(out, table);
  if (sum.skipped) out << sum.skipped << " record(s) skipped\n";
  return 0;
}

// train

struct TrainOptions {
  DataOptions data;
  std::string model = "dl";
  DlTrainOptions dl;
  BtTrainOptions bt;
  double train_fraction = 1.0;
  std::uint64_t seed = 1;
  std::string out;
};

inline int cmd_train(const TrainOptions& o, RunManifest, std::ostream& out) {
  if (o.model != "dl" && o.model != "bt") throw UsageError("--model must be dl or bt");
  if (!(o.train_fraction > 0 && o.train_fraction <= 1)) throw UsageError("--train-fraction must be in (0, 1]");
  const Dataset d = load_dataset(o.data);
  if (!d.classes) throw UsageError("training needs a class column");
  Dataset train = d;
  std::optional<Dataset> test;
  if (o.train_fraction < 1) {
    auto [a, b] = split(d, o.train_fraction, o.seed);
    train = std::move(a);
    test = std::move(b);
  }
  const Model m = o.model == "dl" ? Model(train_decision_list(train, o.dl)) : Model(train_boosted(train, o.bt));
  write_file(o.out, save_model(m));
  out << "train accuracy " << fixed_str(model_accuracy(m, train)) << "\n";
  if (test && test->size()) out << "test accuracy " << fixed_str(model_accuracy(m, *test)) << "\n";
  return 0;
}

// dimacs

struct DimacsOptions {
  std::string model;
  std::string instance_json;
  DataOptions data;
  std::optional<std::size_t> row;
  std::string fixed;
  std::string contested;
  std::string knowledge;
  std::string out;
};

inline int cmd_dimacs(const DimacsOptions& o, RunManifest, std::ostream& out) {
  const Model m = load_model(o.model);
  const FeatureSpace& s = *model_space(m);
  const Instance v = resolve_instance(m, o.instance_json, o.data, o.row);
  std::optional<KnowledgeBase> kb;
  if (!o.knowledge.empty()) kb = knowledge_in_space(load_rules(o.knowledge), s, o.knowledge);
  const FeatureSet fixed = o.fixed.empty() ? all_features(s.size()) : features_from_list(s, o.fixed);
  const ClassIndex c =
      o.contested.empty() ? classify(m, v) : class_from_label(model_classes(m), o.contested, "--class");
  Oracle oracle(m);
  const std::string cnf = oracle.to_dimacs({fixed, v, c, kb ? &*kb : nullptr});
  if (o.out.empty()) {
    out << cnf;
  } else {
    write_file(o.out, cnf);
  }
  return 0;
}

}  // namespace kbx
