#pragma once
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gava/strategies.hpp"

namespace gava::cli {

// Everything a run needs: strategy and decoding knobs, paths, and the
// evaluator backend selector. Defaults carry the published settings
// (theta=0.9, k=5, n=5, patience=3, lr=5e-6, batch=32).
struct RunConfig {
    StrategyConfig strategy;
    std::string evaluator = "oracle";  // "oracle" | "external:CMD"
    bool strict_k = true;

    std::string train_path;
    std::string dev_path;
    std::string input_path;
    std::string model_path;
    std::string out_path;
    std::string history_path;
    std::string report_path;

    bool seed_set = false;  // seed resolution: flag > file > env > 0
};

// Parses the JSON config file then applies key=value overrides on top
// (file values < overrides). Unknown keys and type mismatches are errors
// naming the key. An empty path yields pure defaults.
RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

// Canonical JSON form of the effective config (paths excluded); hashed into
// reports and checkpoints so drift between runs is detectable.
std::string config_canonical_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

// Entry point behind the `gava` binary. argv excludes the program name.
// Exit codes: 0 success, 1 validation error, 2 runtime failure.
int run_command(const std::vector<std::string>& argv);

}  // namespace gava::cli
