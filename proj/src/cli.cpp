// SPDX-License-Identifier: Apache-2.0
#include "dualre/cli.hpp"

#include "dualre/bias_stats.hpp"
#include "dualre/errors.hpp"
#include "dualre/evaluator.hpp"
#include "dualre/loss.hpp"
#include "dualre/report.hpp"
#include "dualre/synth_data.hpp"
#include "dualre/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>

namespace dualre {

namespace {

std::string ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  return dir;
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

Dataset load_split(const ExperimentConfig& cfg, const std::string& name) {
  const std::string path = join(cfg.data_dir(), name + ".jsonl");
  if (!std::filesystem::exists(path)) {
    throw IoError("missing dataset " + path + " (run `dualre gen` first or set data_dir)");
  }
  try {
    return read_dataset(path);
  } catch (const ParseError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::optional<RelationId> na_of(const Dataset& data) {
  return data.task == Task::Sentence ? std::optional<RelationId>(na_relation(data.n_relations)) : std::nullopt;
}

}  // namespace

int cmd_gen(const ExperimentConfig& cfg, std::ostream& out) {
  const GenConfig gen = cfg.gen_config();
  const std::vector<double> targets = cfg.inflation_targets();
  const GeneratedData data = generate_datasets(gen);
  const std::string dir = ensure_dir(cfg.out_dir());
  write_dataset(join(dir, "train_ha.jsonl"), data.train_ha);
  write_dataset(join(dir, "train_ds.jsonl"), data.train_ds);
  write_dataset(join(dir, "dev.jsonl"), data.dev);
  write_dataset(join(dir, "test.jsonl"), data.test);
  write_kb(join(dir, "kb.tsv"), data.kb);

  const InflationReport measured = compute_inflation(data.train_ha, data.train_ds, cfg.get_double("smoothing"));
  CsvTable table{{"relation_id", "target", "expected", "measured"}, {}};
  for (int r = 0; r < gen.n_relations; ++r) {
    table.add_row({std::to_string(r), format_number(targets[static_cast<std::size_t>(r)]),
                   format_number(expected_inflation(gen, r)), format_number(measured.inflation[static_cast<std::size_t>(r)])});
  }
  table.write(join(dir, "inflation_targets.csv"));

  out << "generated " << data.train_ha.documents.size() << " HA / " << data.train_ds.documents.size() << " DS / "
      << data.dev.documents.size() << " dev / " << data.test.documents.size() << " test documents, "
      << data.kb.size() << " KB triples\n";
  out << "relation  target  measured\n";
  for (int r = 0; r < gen.n_relations; ++r) {
    out << std::setw(8) << r << "  " << std::setw(6) << format_number(targets[static_cast<std::size_t>(r)]) << "  "
        << format_number(measured.inflation[static_cast<std::size_t>(r)]) << '\n';
  }
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& out) {
  const TrainConfig tc = cfg.train_config();
  const Dataset train_ha = tc.mode == TrainMode::DSOnly ? Dataset{} : load_split(cfg, "train_ha");
  const Dataset train_ds = tc.mode == TrainMode::HAOnly ? Dataset{} : load_split(cfg, "train_ds");
  const Dataset dev = load_split(cfg, "dev");
  const TrainResult result = train(tc, train_ha, train_ds, dev);

  ensure_dir(cfg.out_dir());
  const std::string ckpt = cfg.checkpoint();
  const auto parent = std::filesystem::path(ckpt).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  save_model(ckpt, result.model);
  const CsvTable history = history_table(result.history);
  history.write(join(cfg.out_dir(), "history.csv"));
  history.write(out);
  out << "best epoch " << result.history.best_epoch << "; checkpoint " << ckpt << '\n';
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, std::ostream& out) {
  Model model = load_model(cfg.checkpoint());
  const std::string split = cfg.get("split");
  if (split != "dev" && split != "test") throw ConfigError("split must be dev or test");
  const Dataset data = load_split(cfg, split);
  if (data.task != model.task()) throw ConfigError("checkpoint and dataset tasks differ");

  const std::vector<PairScores> scores = score_pairs(model, data);
  const std::vector<RelationFact> predictions = predict_facts(scores, data.task, data.n_relations, model.threshold);
  const std::vector<RelationFact> gold = gold_facts(data);
  const auto na = na_of(data);
  const EvalResult result = micro_f1(predictions, gold, na);

  const std::string dir = ensure_dir(cfg.out_dir());
  MetricsRow row{std::string(to_string(model.mode)), model.seed, split, result, std::nullopt};
  if (data.task == Task::Document) row.threshold = model.threshold;
  const CsvTable metrics = metrics_table({row});
  metrics.write(join(dir, "metrics.csv"));
  pr_table(pr_curve(scored_facts(scores, data.n_relations), gold, na)).write(join(dir, "pr_curve.csv"));

  const Dataset train_ha = load_split(cfg, "train_ha");
  const Dataset train_ds = load_split(cfg, "train_ds");
  const InflationReport inflation = compute_inflation(train_ha, train_ds, cfg.get_double("smoothing"));
  const int n_groups = cfg.get_int("n_groups");
  const std::vector<int> groups = group_by_inflation(inflation, n_groups);
  const std::vector<GroupResult> by_group = f1_by_group(predictions, gold, groups, n_groups, na);
  const CsvTable group_csv = groups_table(by_group, group_ranges(inflation, groups, n_groups));
  group_csv.write(join(dir, "groups.csv"));

  metrics.write(out);
  group_csv.write(out);
  return 0;
}

int cmd_bias(const ExperimentConfig& cfg, std::ostream& out) {
  const Dataset train_ha = load_split(cfg, "train_ha");
  const Dataset train_ds = load_split(cfg, "train_ds");
  const InflationReport report = compute_inflation(train_ha, train_ds, cfg.get_double("smoothing"));
  const std::vector<int> groups = group_by_inflation(report, cfg.get_int("n_groups"));

  std::vector<double> sample;
  for (std::size_t r = 0; r < report.size(); ++r) {
    if (!report.flagged[r] && report.inflation[r] > 0.0) sample.push_back(report.inflation[r]);
  }
  FamilyRanking ranking;
  if (sample.size() >= 5) {
    ranking = rank_families(sample);
  } else {
    for (Family f : kAllFamilies) ranking.skipped.emplace_back(f, "fewer than five finite positive inflations");
  }

  const std::string dir = ensure_dir(cfg.out_dir());
  const CsvTable bias = bias_table(report, groups);
  const CsvTable fits = fit_table(ranking);
  bias.write(join(dir, "bias_report.csv"));
  fits.write(join(dir, "fit_report.csv"));
  bias.write(out);
  fits.write(out);
  for (const auto& [family, reason] : ranking.skipped) out << "skipped " << to_string(family) << ": " << reason << '\n';
  return 0;
}

int cmd_gradcheck(const ExperimentConfig& cfg, std::ostream& out) {
  const int count = cfg.get_int("gradcheck_examples");
  const double tolerance = cfg.get_double("gradcheck_tolerance");
  const int hidden = cfg.get_int("hidden");
  const int n_relations = cfg.get_int("n_relations");
  if (count < 1 || hidden < 1 || n_relations < 1) throw ConfigError("gradcheck needs positive examples, hidden, n_relations");
  const double epsilon = cfg.get_double("epsilon");
  constexpr double lambdas[] = {0.0, 1e-3, 0.1, 1.0};

  Rng rng(mix_seed(cfg.get_u64("seed"), 0x6763));
  CsvTable table{{"example", "task", "source", "lambda", "discrepancy", "autodiff_max", "predicted_max"}, {}};
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const Task task = i % 2 == 0 ? Task::Sentence : Task::Document;
    const double lambda = lambdas[(i / 2) % 4];
    const Source source = std::bernoulli_distribution(0.5)(rng) ? Source::HA : Source::DS;
    const Index outputs = output_size(task, n_relations);
    OutputLayerParams params = OutputLayerParams::init({hidden, outputs, epsilon, task}, rng);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    params.W(Net::DS) = uniform_tensor({hidden, outputs, hidden}, bound, rng);
    params.b(Net::DS) = uniform_tensor({outputs}, bound, rng);

    GradientExample ex;
    ex.head = Eigen::VectorXd::NullaryExpr(hidden, [&] { return std::uniform_real_distribution<double>(-1, 1)(rng); });
    ex.tail = Eigen::VectorXd::NullaryExpr(hidden, [&] { return std::uniform_real_distribution<double>(-1, 1)(rng); });
    ex.labels.source = source;
    if (task == Task::Sentence) {
      ex.labels.relations = {std::uniform_int_distribution<RelationId>(0, static_cast<RelationId>(outputs) - 1)(rng)};
    } else {
      for (RelationId r = 0; r < outputs; ++r) {
        if (std::bernoulli_distribution(0.3)(rng)) ex.labels.relations.push_back(r);
      }
    }
    const GradientIdentityReport rep = verify_gradient_identities(params, ex, {lambda, task, kProbabilityClamp});
    worst = std::max(worst, rep.discrepancy);
    table.add_row({std::to_string(i), std::string(to_string(task)), std::string(to_string(source)), format_number(lambda),
                   format_number(rep.discrepancy), format_number(rep.autodiff_max), format_number(rep.predicted_max)});
  }
  const std::string dir = ensure_dir(cfg.out_dir());
  table.write(join(dir, "gradcheck.csv"));
  const bool ok = worst <= tolerance;
  out << "gradcheck: " << count << " examples, max discrepancy " << format_number(worst) << " (tolerance "
      << format_number(tolerance) << ") " << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual supervision relation extraction experiments", "dualre"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> flags;

  using Handler = int (*)(const ExperimentConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"gen", "generate KB, corpora and labels", cmd_gen},
      {"train", "train a model and write a checkpoint", cmd_train},
      {"eval", "evaluate a checkpoint", cmd_eval},
      {"bias", "measure inflation and fit distributions", cmd_bias},
      {"gradcheck", "verify the calibrated gradient identities", cmd_gradcheck},
  };
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const ConfigKey& key : config_keys()) {
      std::string names = "--" + key.name;
      std::string dashed = key.name;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (dashed != key.name) names += ",--" + dashed;
      sub->add_option(names, flags[key.name], key.help + " [" + key.default_value + "]");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const ConfigKey& key : config_keys()) {
      if (chosen->count("--" + key.name) > 0) cfg.set(key.name, flags[key.name], "flag");
    }
    out << "# " << chosen->get_name() << " configuration\n";
    cfg.print(out);
    for (const auto& [name, help, handler] : commands) {
      if (name == chosen->get_name()) return handler(cfg, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace dualre
