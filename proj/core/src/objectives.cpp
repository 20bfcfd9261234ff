#include "hopf/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "hopf/error.hpp"
#include "hopf/format.hpp"

namespace hopf {

std::vector<double> wce_weights(std::span<const std::size_t> label_counts) {
  if (label_counts.empty()) throw ConfigError("wce_weights: no labels");
  double total = 0.0;
  for (std::size_t i = 0; i < label_counts.size(); ++i) {
    if (label_counts[i] == 0)
      throw ConfigError("wce_weights: label " + std::to_string(i) +
                        " has no training example; draw a larger labeled sample or disable use_wce");
    total += static_cast<double>(label_counts[i]);
  }
  const double l = static_cast<double>(label_counts.size());
  std::vector<double> w;
  w.reserve(label_counts.size());
  for (std::size_t c : label_counts) w.push_back(total / (l * static_cast<double>(c)));
  return w;
}

std::vector<std::size_t> label_counts(const DenseMatrix& y, std::span<const NodeId> rows) {
  std::vector<std::size_t> counts(y.cols(), 0);
  auto add = [&](std::size_t r) {
    if (r >= y.rows()) throw ArgumentError("label_counts: row out of range");
    auto row = y.row(r);
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j] != 0.0) ++counts[j];
  };
  if (rows.empty()) {
    for (std::size_t r = 0; r < y.rows(); ++r) add(r);
  } else {
    for (NodeId r : rows) add(r);
  }
  return counts;
}

LossResult weighted_cross_entropy(const DenseMatrix& pred, const DenseMatrix& truth, std::span<const double> omega,
                                  TaskKind task) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw ShapeError("weighted_cross_entropy: prediction and truth shapes differ");
  if (!omega.empty() && omega.size() != pred.cols())
    throw ShapeError("weighted_cross_entropy: one weight per label expected");
  if (pred.rows() == 0) throw ArgumentError("weighted_cross_entropy: empty batch");
  auto w = [&](std::size_t j) { return omega.empty() ? 1.0 : omega[j]; };
  auto clamp = [](double p) { return std::clamp(p, kLogClamp, 1.0 - kLogClamp); };

  LossResult r;
  r.grad = DenseMatrix(pred.rows(), pred.cols());
  const std::size_t n = pred.rows();
  const std::size_t l = pred.cols();
  if (task == TaskKind::MultiClass) {
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto t = truth.row(i);
      const auto y = static_cast<std::size_t>(std::max_element(t.begin(), t.end()) - t.begin());
      const double p = clamp(pred(i, y));
      r.loss -= w(y) * std::log(p);
      r.grad(i, y) = -scale * w(y) / p;
    }
    r.loss *= scale;
  } else {
    const double scale = 1.0 / static_cast<double>(n * l);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < l; ++j) {
        const double p = clamp(pred(i, j));
        const double y = truth(i, j);
        r.loss -= w(j) * y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        r.grad(i, j) = -scale * (w(j) * y / p - (1.0 - y) / (1.0 - p));
      }
    r.loss *= scale;
  }
  return r;
}

DenseMatrix binarize(const DenseMatrix& pred, TaskKind task) {
  DenseMatrix out(pred.rows(), pred.cols());
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    auto p = pred.row(i);
    if (task == TaskKind::MultiClass) {
      if (p.empty()) continue;
      out(i, static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())) = 1.0;
    } else {
      for (std::size_t j = 0; j < p.size(); ++j) out(i, j) = p[j] >= 0.5 ? 1.0 : 0.0;
    }
  }
  return out;
}

double micro_f1(const DenseMatrix& pred_binary, const DenseMatrix& truth_binary) {
  if (pred_binary.rows() != truth_binary.rows() || pred_binary.cols() != truth_binary.cols())
    throw ShapeError("micro_f1: prediction and truth shapes differ");
  std::size_t tp = 0, fp = 0, fn = 0;
  auto p = pred_binary.values();
  auto t = truth_binary.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pp = p[i] != 0.0;
    const bool tt = t[i] != 0.0;
    tp += pp && tt;
    fp += pp && !tt;
    fn += !pp && tt;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  out << "model,dataset,fold,micro_f1,loss\n";
  for (const auto& r : records)
    out << r.model << ',' << r.dataset << ',' << r.fold << ',' << format_double(r.micro_f1) << ','
        << format_double(r.loss) << '\n';
}

std::string metrics_to_json(std::span<const MetricsRecord> records) {
  auto arr = nlohmann::json::array();
  for (const auto& r : records)
    arr.push_back({{"model", r.model}, {"dataset", r.dataset}, {"fold", r.fold}, {"micro_f1", r.micro_f1},
                   {"loss", r.loss}});
  return arr.dump(2);
}

}  // namespace hopf
