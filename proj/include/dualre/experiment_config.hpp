// SPDX-License-Identifier: Apache-2.0
//
// Flat key/value experiment configuration.
//
// File syntax: one `key = value` per line; `#` starts a comment. Every key
// has a built-in default and may be overridden by the file and then by a
// command-line flag of the same name.
#pragma once

#include "dualre/synth_data.hpp"
#include "dualre/trainer.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dualre {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// All recognized keys, in display order.
const std::vector<ConfigKey>& config_keys();

class ExperimentConfig {
public:
  ExperimentConfig();

  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value, const std::string& origin);
  void load_file(const std::string& path);
  void load_stream(std::istream& in, const std::string& origin);

  const std::string& get(const std::string& key) const;
  const std::string& origin(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  /// Generator settings including per-relation inflation targets.
  GenConfig gen_config() const;
  std::vector<double> inflation_targets() const;
  TrainConfig train_config() const;

  std::string out_dir() const;
  /// Falls back to out_dir when unset.
  std::string data_dir() const;
  /// Falls back to <out_dir>/model.ckpt when unset.
  std::string checkpoint() const;

  /// "key = value  # origin" lines in display order.
  void print(std::ostream& out) const;

private:
  struct Entry {
    std::string value;
    std::string origin;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace dualre
