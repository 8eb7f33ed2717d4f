// SPDX-License-Identifier: Apache-2.0
#include "dualre/experiment_config.hpp"

#include "dualre/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

namespace dualre {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "1", "seed for every random stream"},
      {"out_dir", "out", "directory for command outputs"},
      {"data_dir", "", "directory holding generated datasets (default: out_dir)"},
      {"checkpoint", "", "model checkpoint path (default: <out_dir>/model.ckpt)"},
      {"task", "document", "sentence | document"},
      {"n_entities", "80", "entities in the synthetic KB"},
      {"n_relations", "8", "relation types, NA excluded"},
      {"kb_triples", "480", "KB size"},
      {"n_train_ha", "300", "human-annotated training documents"},
      {"n_train_ds", "3000", "distantly supervised training documents"},
      {"n_dev", "200", "development documents"},
      {"n_test", "300", "test documents"},
      {"min_pairs", "2", "fewest entity pairs placed per document"},
      {"max_pairs", "6", "most entity pairs placed per document"},
      {"negative_pairs", "1", "sampled unrelated pairs per document"},
      {"n_filler", "20", "filler vocabulary size"},
      {"template_variants", "8", "alternative template token pairs per relation"},
      {"extra_mention_prob", "0.3", "chance of a second mention per entity"},
      {"cooccur_extra_prob", "0", "chance of an extra unexpressed KB pair per slot"},
      {"inflation_dist", "loglinear", "loglinear | lognormal target inflations"},
      {"inflation_min", "0.5", "smallest target inflation"},
      {"inflation_max", "16", "largest target inflation"},
      {"inflation_mu", "1", "log-mean of lognormal targets"},
      {"inflation_sigma", "1", "log-sd of lognormal targets"},
      {"mode", "dual", "dual | multitask | single | ha_only | ds_only"},
      {"lambda", "0.1", "weight of the disagreement penalty"},
      {"hidden", "12", "hidden size d"},
      {"optimizer", "adam", "sgd | adam"},
      {"learning_rate", "0.01", "optimizer step size"},
      {"batch_size", "40", "examples per batch"},
      {"batch_mode", "mixed", "mixed (half HA, half DS) | alternating"},
      {"epochs", "3", "passes over the larger training pool"},
      {"select_best", "true", "keep the epoch with the best dev F1"},
      {"context_window", "1", "tokens averaged on each side of a word"},
      {"entity_encoder", "cross", "cross | average"},
      {"score_with_projected", "false", "attention scores from projected word vectors"},
      {"epsilon", "0.0001", "lower bound added to sigma"},
      {"split", "test", "dataset evaluated by eval: dev | test"},
      {"n_groups", "4", "inflation groups"},
      {"smoothing", "0", "additive smoothing of label counts"},
      {"gradcheck_examples", "100", "random examples checked by gradcheck"},
      {"gradcheck_tolerance", "1e-8", "largest accepted relative discrepancy"},
  };
  return keys;
}

ExperimentConfig::ExperimentConfig() {
  for (const ConfigKey& k : config_keys()) entries_[k.name] = {k.default_value, "default"};
}

void ExperimentConfig::set(const std::string& key, const std::string& value, const std::string& origin) {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = {value, origin};
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ExperimentConfig::load_stream(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    try {
      set(key, trim(line.substr(eq + 1)), origin);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  load_stream(in, path);
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.value;
}

const std::string& ExperimentConfig::origin(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.origin;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

}  // namespace

int ExperimentConfig::get_int(const std::string& key) const { return parse_number<int>(key, get(key)); }

double ExperimentConfig::get_double(const std::string& key) const {
  const double v = parse_number<double>(key, get(key));
  if (!std::isfinite(v)) throw ConfigError("config key '" + key + "' must be finite");
  return v;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> ExperimentConfig::inflation_targets() const {
  const int n = get_int("n_relations");
  if (n < 1) throw ConfigError("n_relations must be positive");
  const double lo = get_double("inflation_min");
  const double hi = get_double("inflation_max");
  if (!(lo > 0.0) || hi < lo) throw ConfigError("need 0 < inflation_min <= inflation_max");
  const std::string& dist = get("inflation_dist");
  if (dist == "loglinear") return log_spaced(n, lo, hi);
  if (dist != "lognormal") throw ConfigError("inflation_dist must be loglinear or lognormal");
  const double sigma = get_double("inflation_sigma");
  if (!(sigma > 0.0)) throw ConfigError("inflation_sigma must be positive");
  Rng rng(mix_seed(get_u64("seed"), 0x696e66));
  std::lognormal_distribution<double> draw(get_double("inflation_mu"), sigma);
  std::vector<double> out;
  for (int r = 0; r < n; ++r) out.push_back(std::clamp(draw(rng), lo, hi));
  return out;
}

GenConfig ExperimentConfig::gen_config() const {
  GenConfig g;
  g.task = parse_task(get("task"));
  g.n_entities = get_int("n_entities");
  g.n_relations = get_int("n_relations");
  g.kb_triples = get_int("kb_triples");
  g.n_train_ha = get_int("n_train_ha");
  g.n_train_ds = get_int("n_train_ds");
  g.n_dev = get_int("n_dev");
  g.n_test = get_int("n_test");
  g.min_pairs = get_int("min_pairs");
  g.max_pairs = get_int("max_pairs");
  g.negative_pairs = get_int("negative_pairs");
  g.n_filler = get_int("n_filler");
  g.template_variants = get_int("template_variants");
  g.extra_mention_prob = get_double("extra_mention_prob");
  g.cooccur_extra_prob = get_double("cooccur_extra_prob");
  g.seed = get_u64("seed");
  set_target_inflations(g, inflation_targets());
  g.validate();
  return g;
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t;
  t.mode = parse_train_mode(get("mode"));
  t.task = parse_task(get("task"));
  t.lambda = get_double("lambda");
  t.hidden = get_int("hidden");
  t.optimizer = parse_optimizer(get("optimizer"));
  t.learning_rate = get_double("learning_rate");
  t.batch_size = get_int("batch_size");
  t.epochs = get_int("epochs");
  t.seed = get_u64("seed");
  const std::string& bm = get("batch_mode");
  if (bm == "mixed") {
    t.batch_mode = BatchMode::Mixed;
  } else if (bm == "alternating") {
    t.batch_mode = BatchMode::Alternating;
  } else {
    throw ConfigError("batch_mode must be mixed or alternating");
  }
  t.select_best = get_bool("select_best");
  t.context_window = get_int("context_window");
  t.entity_encoder = parse_entity_encoder(get("entity_encoder"));
  t.score_with_projected = get_bool("score_with_projected");
  t.epsilon = get_double("epsilon");
  t.validate();
  return t;
}

std::string ExperimentConfig::out_dir() const { return get("out_dir"); }

std::string ExperimentConfig::data_dir() const {
  const std::string& d = get("data_dir");
  return d.empty() ? out_dir() : d;
}

std::string ExperimentConfig::checkpoint() const {
  const std::string& c = get("checkpoint");
  return c.empty() ? out_dir() + "/model.ckpt" : c;
}

void ExperimentConfig::print(std::ostream& out) const {
  for (const ConfigKey& k : config_keys()) {
    const Entry& e = entries_.at(k.name);
    out << k.name << " = " << e.value << "  # " << e.origin << '\n';
  }
}

}  // namespace dualre
