#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hopf {

// Model x dataset score grid. Missing cells are allowed.
struct ScoreTable {
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  std::vector<std::vector<std::optional<double>>> scores;  // [model][dataset]

  void set(const std::string& model, const std::string& dataset, double score);
  // Registers the row and column without a score; returns their indices.
  std::pair<std::size_t, std::size_t> declare(const std::string& model, const std::string& dataset);
  std::optional<double> get(std::size_t model, std::size_t dataset) const { return scores[model][dataset]; }
};

// CSV with a header naming at least the columns model, dataset, micro_f1.
// Throws IngestError on malformed rows or duplicate cells.
ScoreTable read_score_csv(const std::filesystem::path& path);
ScoreTable parse_score_csv(const std::string& text);

// cells[m][d] = (best_d - score) / best_d, empty where the score is missing.
// Throws ArgumentError when a column's best score is 0 or a column is empty.
std::vector<std::vector<std::optional<double>>> shortfall_cells(const ScoreTable& t);
// Mean cell shortfall per model over the datasets it has scores for; NaN for
// a model without any score.
std::vector<double> shortfall(const ScoreTable& t);
// Mean rank per model; rank 1 is the best score in a column, ties share the
// mean of their positions. NaN for a model without any score.
std::vector<double> average_rank(const ScoreTable& t);

struct ModelStanding {
  std::string model;
  double shortfall = 0.0;
  double average_rank = 0.0;
  std::size_t datasets = 0;
};

// One entry per model, sorted by shortfall ascending (ties by name); models
// without scores come last.
std::vector<ModelStanding> compare_models(const ScoreTable& t);

}  // namespace hopf
