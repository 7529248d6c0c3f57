#pragma once

// Command-line surface: train / eval / predict / gradcheck / inspect /
// ablate.  run_command is the whole program minus argv[0], exposed so tests
// can drive every command in-process and inspect exit codes directly.

#include <set>
#include <string>
#include <vector>

#include "freqkan/data.hpp"
#include "freqkan/model.hpp"
#include "freqkan/training.hpp"
#include "json.hpp"

namespace freqkan {

// The union of everything a run needs, addressed by flat dotted keys
// ("model.k", "train.lr", "data.csv", "out").  The convenience key "seed"
// sets model.seed and train.seed together; it is applied before the
// specific keys of the same source so either can still override it.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string csv;                               // data.csv
  DatasetFamily family = DatasetFamily::other;   // data.family
  std::string timestamp_col = "auto";            // data.timestamp_col: auto|yes|no
  std::string out = "out";                       // output directory
  // Dotted keys the user actually provided (config file or --set/--seed).
  // Checkpoint-backed commands use this to tell deliberate overrides apart
  // from untouched defaults.
  std::set<std::string> explicit_keys;
};

// Applies one dotted key; unknown keys and wrong value types throw
// ConfigError.
void apply_config_key(RunConfig& rc, const std::string& key,
                      const nlohmann::json& value);

// Applies a whole JSON object of dotted keys ("seed" first).  `origin`
// names the source (file path or "--set") in error messages.
void apply_config_json(RunConfig& rc, const nlohmann::json& j,
                       const std::string& origin);

// Every effective value under its canonical dotted key; feeding the result
// back through --config reproduces the run.
nlohmann::json resolved_config_json(const RunConfig& rc);

// argv[1..]; returns the process exit code (0 ok, 1 config/data error,
// 2 numerical failure).
int run_command(std::vector<std::string> args);

}  // namespace freqkan
