// SPDX-License-Identifier: Apache-2.0
//
// Subcommands gen | train | eval | bias | gradcheck.
#pragma once

#include "dualre/experiment_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dualre {

/// Runs one command; `args` excludes the program name. Returns the exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_gen(const ExperimentConfig& cfg, std::ostream& out);
int cmd_train(const ExperimentConfig& cfg, std::ostream& out);
int cmd_eval(const ExperimentConfig& cfg, std::ostream& out);
int cmd_bias(const ExperimentConfig& cfg, std::ostream& out);
int cmd_gradcheck(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace dualre
