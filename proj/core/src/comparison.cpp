#include "hopf/comparison.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "hopf/error.hpp"

namespace hopf {

namespace {

std::size_t index_of(std::vector<std::string>& names, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
  names.push_back(name);
  return names.size() - 1;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::pair<std::size_t, std::size_t> ScoreTable::declare(const std::string& model, const std::string& dataset) {
  const std::size_t m = index_of(models, model);
  const std::size_t d = index_of(datasets, dataset);
  scores.resize(models.size());
  for (auto& row : scores) row.resize(datasets.size());
  return {m, d};
}

void ScoreTable::set(const std::string& model, const std::string& dataset, double score) {
  const auto [m, d] = declare(model, dataset);
  if (scores[m][d]) throw IngestError("duplicate score for (" + model + ", " + dataset + ")");
  scores[m][d] = score;
}

ScoreTable parse_score_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) header = split_csv(line);
  }
  if (header.empty()) throw IngestError("scores: empty file");
  auto col = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IngestError(std::string("scores: header lacks a '") + name + "' column");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cm = col("model"), cd = col("dataset"), cs = col("micro_f1");
  ScoreTable t;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw IngestError("scores:" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(cells.size()));
    if (cells[cm].empty() || cells[cd].empty())
      throw IngestError("scores:" + std::to_string(lineno) + ": empty model or dataset name");
    const std::string& s = cells[cs];
    if (s.empty()) {
      t.declare(cells[cm], cells[cd]);
      continue;
    }
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size())
      throw IngestError("scores:" + std::to_string(lineno) + ": bad score '" + s + "'");
    t.set(cells[cm], cells[cd], v);
  }
  if (t.models.empty()) throw IngestError("scores: no score rows");
  return t;
}

ScoreTable read_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open scores " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_score_csv(buf.str());
}

std::vector<std::vector<std::optional<double>>> shortfall_cells(const ScoreTable& t) {
  std::vector<std::vector<std::optional<double>>> cells(t.models.size(),
                                                        std::vector<std::optional<double>>(t.datasets.size()));
  for (std::size_t d = 0; d < t.datasets.size(); ++d) {
    std::optional<double> best;
    for (std::size_t m = 0; m < t.models.size(); ++m)
      if (auto s = t.get(m, d); s && (!best || *s > *best)) best = s;
    if (!best) throw ArgumentError("shortfall: dataset '" + t.datasets[d] + "' has no scores");
    if (*best == 0.0) throw ArgumentError("shortfall: best score on '" + t.datasets[d] + "' is 0");
    for (std::size_t m = 0; m < t.models.size(); ++m)
      if (auto s = t.get(m, d)) cells[m][d] = (*best - *s) / *best;
  }
  return cells;
}

std::vector<double> shortfall(const ScoreTable& t) {
  const auto cells = shortfall_cells(t);
  std::vector<double> out(t.models.size(), 0.0);
  for (std::size_t m = 0; m < t.models.size(); ++m) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells[m])
      if (c) {
        sum += *c;
        ++n;
      }
    out[m] = n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
  }
  return out;
}

std::vector<double> average_rank(const ScoreTable& t) {
  std::vector<double> sum(t.models.size(), 0.0);
  std::vector<std::size_t> count(t.models.size(), 0);
  for (std::size_t d = 0; d < t.datasets.size(); ++d) {
    std::vector<std::pair<double, std::size_t>> col;
    for (std::size_t m = 0; m < t.models.size(); ++m)
      if (auto s = t.get(m, d)) col.emplace_back(*s, m);
    std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < col.size();) {
      std::size_t j = i;
      while (j < col.size() && col[j].first == col[i].first) ++j;
      // positions i+1 .. j share their mean
      const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
      for (std::size_t q = i; q < j; ++q) {
        sum[col[q].second] += rank;
        ++count[col[q].second];
      }
      i = j;
    }
  }
  std::vector<double> out(t.models.size(), 0.0);
  for (std::size_t m = 0; m < out.size(); ++m)
    out[m] = count[m] == 0 ? std::numeric_limits<double>::quiet_NaN() : sum[m] / static_cast<double>(count[m]);
  return out;
}

std::vector<ModelStanding> compare_models(const ScoreTable& t) {
  const auto sf = shortfall(t);
  const auto rk = average_rank(t);
  std::vector<ModelStanding> out;
  for (std::size_t m = 0; m < t.models.size(); ++m) {
    std::size_t n = 0;
    for (std::size_t d = 0; d < t.datasets.size(); ++d) n += t.get(m, d).has_value();
    out.push_back({t.models[m], sf[m], rk[m], n});
  }
  std::stable_sort(out.begin(), out.end(), [](const ModelStanding& a, const ModelStanding& b) {
    if ((a.datasets == 0) != (b.datasets == 0)) return b.datasets == 0;
    if (a.datasets == 0 || a.shortfall == b.shortfall) return a.model < b.model;
    return a.shortfall < b.shortfall;
  });
  return out;
}

}  // namespace hopf
