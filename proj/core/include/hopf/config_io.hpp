#pragma once

#include <filesystem>
#include <string>

#include "hopf/iterative.hpp"
#include "hopf/training.hpp"

namespace hopf {

struct RunConfig {
  TrainConfig train;
  HopfConfig hopf;
};

// One JSON object whose keys are TrainConfig / HopfConfig field names
// (batch_size, hidden_dim, ..., C, T, warm_start, theta_mode, ...). Absent keys
// keep the values in `defaults`; unknown keys or wrong types throw ConfigError.
RunConfig parse_run_config(const std::string& json_text, const RunConfig& defaults = {});
RunConfig read_run_config(const std::filesystem::path& path, const RunConfig& defaults = {});

std::string to_json(const TrainConfig& c);
std::string to_json(const HopfConfig& c);
// Both configs merged into one object.
std::string to_json(const RunConfig& c);

}  // namespace hopf
