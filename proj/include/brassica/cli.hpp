#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "brassica/dataset.hpp"
#include "brassica/optimizer.hpp"

namespace brassica {

// Process exit codes; every failure path maps to exactly one.
enum ExitStatus : int {
    kExitOk = 0,
    kExitUsage = 1,    // usage / config errors
    kExitData = 2,     // data / ingestion errors
    kExitNumeric = 3,  // non-finite loss or gradient
    kExitIo = 4,       // filesystem / checkpoint errors
};

// Everything a run needs, parsed from a line-oriented `key = value` file
// with '#' comments. Unknown keys are rejected.
struct Config {
    std::string data_root;
    SplitRatios ratios;
    uint64_t split_seed = 1;
    TrainConfig train;
    std::string checkpoint;
    std::string output_dir = "out";
    bool strict_deterministic = false;

    bool operator==(const Config&) const = default;
};

Config parse_config_text(const std::string& text);
Config parse_config_file(const std::string& path);

// Echo that reparses to an identical Config (doubles printed round-trip).
std::string dump_config(const Config& c);

int cmd_train(const Config& config);
int cmd_eval(const Config& config, const std::string& split_name);
int cmd_predict(const Config& config, const std::string& image_path);
int cmd_sweep(const Config& config, const std::vector<int64_t>& batch_sizes,
              const std::vector<int64_t>& epoch_budgets);

// Maps a thrown engine error onto the ExitStatus contract and prints the
// message to stderr.
int run_command(const std::function<int()>& body);

}  // namespace brassica
