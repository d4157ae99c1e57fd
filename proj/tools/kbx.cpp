// kbx: mine background knowledge, explain model predictions, audit explanations.

#include <iostream>

#include "CLI11.hpp"
#include "kbx/kbx.hpp"

namespace {

void add_data_options(CLI::App* app, kbx::DataOptions& d, bool positional = true) {
  if (positional) {
    app->add_option("data", d.path, "CSV dataset")->required();
  } else {
    app->add_option("--data", d.path, "CSV dataset");
  }
  app->add_option("--class", d.class_column, "class column (default: last column)");
  app->add_flag("--no-class", d.no_class, "the table has no class column");
  app->add_option("--qspec", d.qspec, "quantization spec applied to numeric columns");
  app->add_option("--numeric", d.numeric, "columns to treat as numeric")->delimiter(',');
  app->add_option("--categorical", d.categorical, "columns to treat as categorical")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Background-knowledge rule mining and formal explanations"};
  app.require_subcommand(1);

  kbx::RunManifest man;
  for (int i = 1; i < argc; ++i) man.args.emplace_back(argv[i]);
  std::function<int()> run;

  kbx::QuantizeOptions q;
  auto* quant = app.add_subcommand("quantize", "bin numeric columns into equal-width intervals");
  add_data_options(quant, q.data);
  quant->add_option("-q,--intervals", q.intervals, "intervals per numeric column (4, 5 or 6)");
  quant->add_flag("--force", q.force, "allow other interval counts");
  quant->add_option("-o,--out", q.out_prefix, "output prefix")->required();
  quant->callback([&] { run = [&] { return kbx::cmd_quantize(q, man, std::cout); }; });

  kbx::MineOptions mo;
  std::optional<std::size_t> mine_max_rules;
  std::optional<long> mine_time;
  auto* mine = app.add_subcommand("mine", "extract minimal consistent rules");
  add_data_options(mine, mo.data);
  mine->add_option("--max-size", mo.max_size, "largest antecedent");
  mine->add_option("--min-support", mo.min_support, "smallest support");
  mine->add_option("--max-rules", mine_max_rules, "stop after this many rules");
  mine->add_option("--time-ms", mine_time, "time budget in milliseconds");
  mine->add_option("--engine", mo.engine, "lattice or eclat");
  mine->add_option("-j,--jobs", mo.jobs, "worker threads (default: KBX_JOBS or all cores)");
  mine->add_option("-o,--out", mo.out, "rules file (JSONL)")->required();
  mine->callback([&] {
    run = [&] {
      mo.max_rules = mine_max_rules;
      mo.time_ms = mine_time;
      if (mine->count("--jobs") == 0) mo.jobs = kbx::default_jobs();
      return kbx::cmd_mine(mo, man, std::cout);
    };
  });

  kbx::XvalOptions xo;
  std::optional<std::size_t> xval_max_rules;
  std::optional<long> xval_time;
  auto* xval = app.add_subcommand("xval-rules", "k-fold accuracy of mined rules");
  add_data_options(xval, xo.data);
  xval->add_option("-k,--folds", xo.folds, "number of folds");
  xval->add_option("--seed", xo.seed, "fold seed");
  xval->add_option("-q,--intervals", xo.intervals, "intervals per numeric column (4, 5 or 6)");
  xval->add_flag("--force", xo.force, "allow other interval counts");
  xval->add_option("--max-size", xo.max_size, "largest antecedent");
  xval->add_option("--min-support", xo.min_support, "smallest support");
  xval->add_option("--max-rules", xval_max_rules, "rule count limit per fold");
  xval->add_option("--time-ms", xval_time, "time budget per fold");
  xval->add_flag("--resubstitution", xo.resubstitution, "score rules on their own training rows");
  xval->add_option("-o,--out", xo.out, "report file (JSON)");
  xval->callback([&] {
    run = [&] {
      xo.max_rules = xval_max_rules;
      xo.time_ms = xval_time;
      return kbx::cmd_xval_rules(xo, man, std::cout);
    };
  });

  kbx::ExplainOptions eo;
  auto* expl = app.add_subcommand("explain", "enumerate smallest AXps or CXps");
  expl->add_option("model", eo.model, "model file")->required();
  add_data_options(expl, eo.data);
  expl->add_option("--kind", eo.kind, "axp or cxp");
  expl->add_option("--knowledge", eo.knowledge, "rules file used as background knowledge");
  expl->add_option("--enum", eo.enumerate, "explanations per instance");
  expl->add_option("--instances", eo.instances, "test, all, or comma-separated row indices");
  expl->add_option("--test-fraction", eo.test_fraction, "held-out share for --instances test");
  expl->add_option("--seed", eo.seed, "split seed");
  expl->add_flag("--compare", eo.compare, "also run without knowledge and compare");
  expl->add_flag("--deterministic", eo.deterministic, "omit timings from the output");
  expl->add_option("-j,--jobs", eo.jobs, "worker threads (default: KBX_JOBS or all cores)");
  expl->add_option("-o,--out", eo.out, "explanations file (JSONL); a summary JSON is written next to it");
  expl->callback([&] {
    run = [&] {
      if (expl->count("--jobs") == 0) eo.jobs = kbx::default_jobs();
      return kbx::cmd_explain(eo, man, std::cout);
    };
  });

  kbx::AttributeOptions ao;
  std::optional<std::size_t> attr_row;
  auto* attr = app.add_subcommand("attribute", "find the knowledge rules an AXp depends on");
  attr->add_option("model", ao.model, "model file")->required();
  attr->add_option("--knowledge", ao.knowledge, "rules file")->required();
  attr->add_option("--instance", ao.instance_json, "instance as a JSON object of feature: value");
  add_data_options(attr, ao.data, false);
  attr->add_option("--row", attr_row, "row of --data to explain");
  attr->add_option("--axp", ao.axp, "comma-separated feature names (default: a smallest AXp)");
  attr->add_option("-o,--out", ao.out, "attribution file (JSON)");
  attr->callback([&] {
    run = [&] {
      ao.row = attr_row;
      return kbx::cmd_attribute(ao, man, std::cout);
    };
  });

  kbx::AssessOptions so;
  auto* assess = app.add_subcommand("assess", "check and reduce externally produced explanations");
  assess->add_option("model", so.model, "model file")->required();
  add_data_options(assess, so.data);
  assess->add_option("subsets", so.subsets, "feature-subset records (JSONL)")->required();
  assess->add_option("--kind", so.kind, "axp or cxp");
  assess->add_option("--knowledge", so.knowledge, "rules file");
  assess->add_option("-o,--out", so.out, "report file (JSON)");
  assess->callback([&] { run = [&] { return kbx::cmd_assess(so, man, std::cout); }; });

  kbx::TrainOptions to;
  auto* train = app.add_subcommand("train", "fit a small decision list or boosted ensemble");
  add_data_options(train, to.data);
  train->add_option("--model", to.model, "dl or bt");
  train->add_option("--max-rules", to.dl.max_rules, "decision list length");
  train->add_option("--max-rule-size", to.dl.max_rule_size, "literals per decision list rule");
  train->add_option("--min-cover", to.dl.min_cover, "rows a decision list rule must cover");
  train->add_option("--rounds", to.bt.rounds, "boosting rounds");
  train->add_option("--depth", to.bt.depth, "tree depth (1 gives stumps)");
  train->add_option("--learning-rate", to.bt.learning_rate, "shrinkage");
  train->add_option("--scale", to.bt.scale_digits, "fixed-point digits of leaf weights");
  train->add_option("--train-fraction", to.train_fraction, "share of rows used for training");
  train->add_option("--seed", to.seed, "split seed");
  train->add_option("-o,--out", to.out, "model file")->required();
  train->callback([&] { run = [&] { return kbx::cmd_train(to, man, std::cout); }; });

  kbx::DimacsOptions dm;
  std::optional<std::size_t> dim_row;
  auto* dim = app.add_subcommand("dimacs", "write the entailment query as DIMACS CNF");
  dim->add_option("model", dm.model, "model file")->required();
  dim->add_option("--instance", dm.instance_json, "instance as a JSON object of feature: value");
  add_data_options(dim, dm.data, false);
  dim->add_option("--row", dim_row, "row of --data");
  dim->add_option("--fixed", dm.fixed, "comma-separated fixed features (default: all)");
  dim->add_option("--contested", dm.contested, "class to entail (default: the prediction)");
  dim->add_option("--knowledge", dm.knowledge, "rules file");
  dim->add_option("-o,--out", dm.out, "output file (default: stdout)");
  dim->callback([&] {
    run = [&] {
      dm.row = dim_row;
      return kbx::cmd_dimacs(dm, man, std::cout);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (auto* sub : app.get_subcommands()) man.command = sub->get_name();
  try {
    return run();
  } catch (const std::exception& e) {
    std::cerr << "kbx " << man.command << ": " << e.what() << "\n";
    return kbx::exit_code_for(e);
  }
}
