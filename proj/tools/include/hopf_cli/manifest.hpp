#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hopf/datasets.hpp"

namespace hopf::cli {

std::string sha256_hex(std::string_view data);

// SHA-256 over a canonical text rendering of the bundle (name, task, shape,
// sorted edges, then X and Y row by row). Independent of file formatting.
std::string dataset_fingerprint(const DatasetBundle& bundle);

// Library version plus the git commit the build was configured from.
std::string code_version();

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  nlohmann::json dataset = nlohmann::json::object();
  // phase -> seconds, in insertion order
  std::vector<std::pair<std::string, double>> timings;

  nlohmann::json to_json() const;
  // Writes <dir>/manifest.json, creating the directory.
  void write(const std::filesystem::path& dir) const;
};

// name, n, m, f, l, task and fingerprint of a bundle, plus its source.
nlohmann::json describe_dataset(const DatasetBundle& bundle, const std::string& source);

}  // namespace hopf::cli
