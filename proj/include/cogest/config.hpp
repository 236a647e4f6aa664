#pragma once

#include <string>

#include "cogest/pipeline.hpp"
#include "cogest/training.hpp"

// Run configuration shared by the commands: one JSON file carrying the model
// shape, the training schedule, and the artifact paths.  Command-line flags
// override file values; unknown keys are rejected so typos fail loudly.

namespace cogest::config {

struct RunConfig {
    pipeline::ModelConfig model;
    training::TrainConfig train;
    std::string corpus;        // manifest directory
    std::string out;           // command output path
    std::string mode = "encoded";  // emotion source: encoded | sampled | onehot
    std::string split = "test";
    std::string label;         // emotion name override for sampled / onehot
    int samples = 1;           // generated sequences per clip
    bool svg = false;          // also render stick-figure keyframes
    double sigma = 0.1;        // beat-alignment kernel width, seconds

    // Structural checks that do not depend on the command: mode and split
    // names, positive counts, and the training schedule.
    void validate() const;
};

// Parse a config document; every unknown key anywhere is an error.
RunConfig parse_run_config(const std::string& json_text);

// Read and parse a config file; missing or unreadable file is an IoError.
RunConfig load_run_config(const std::string& path);

}  // namespace cogest::config
