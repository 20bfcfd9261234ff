#include "hopf/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "hopf/error.hpp"
#include "hopf/numerics.hpp"
#include "hopf/rng.hpp"

namespace hopf {

static_assert(std::endian::native == std::endian::little, "weight snapshots assume a little-endian host");

void ModelWeights::for_each_slot(const std::function<void(DenseMatrix&)>& fn) {
  fn(input);
  for (auto& l : layers) {
    fn(l.node);
    fn(l.neighbor);
  }
  fn(output);
}

void ModelWeights::for_each_slot(const std::function<void(const DenseMatrix&)>& fn) const {
  fn(input);
  for (const auto& l : layers) {
    fn(l.node);
    fn(l.neighbor);
  }
  fn(output);
}

std::size_t ModelWeights::parameter_count() const {
  std::size_t n = 0;
  for_each_slot([&](const DenseMatrix& m) { n += m.size(); });
  return n;
}

bool ModelWeights::all_finite() const {
  bool ok = true;
  for_each_slot([&](const DenseMatrix& m) { ok = ok && m.all_finite(); });
  return ok;
}

namespace {

struct SlotShapes {
  std::size_t in_rows, in_cols;
  std::vector<std::pair<std::size_t, std::size_t>> node, neighbor;
  std::size_t out_rows, out_cols;
};

SlotShapes shapes_for(const KernelSpec& spec, std::size_t f, std::size_t l) {
  spec.validate();
  if (f == 0 || l == 0) throw ConfigError("model needs at least one feature and one label");
  SlotShapes s{f, spec.hidden_dim, {}, {}, spec.layer_width(spec.depth), l};
  for (std::size_t k = 1; k <= spec.depth; ++k) {
    const std::size_t d = spec.hidden_dim;
    s.node.emplace_back(spec.has_node_path() ? spec.node_input_width(k) : 0, spec.has_node_path() ? d : 0);
    const bool own_neighbor = spec.has_neighbor_path() && !spec.tie_weights;
    s.neighbor.emplace_back(own_neighbor ? spec.neighbor_input_width(k, l) : 0, own_neighbor ? d : 0);
  }
  return s;
}

}  // namespace

ModelWeights zero_weights(const KernelSpec& spec, std::size_t num_features, std::size_t num_labels) {
  const auto s = shapes_for(spec, num_features, num_labels);
  ModelWeights w;
  w.input = DenseMatrix(s.in_rows, s.in_cols);
  for (std::size_t k = 0; k < spec.depth; ++k)
    w.layers.push_back({DenseMatrix(s.node[k].first, s.node[k].second),
                        DenseMatrix(s.neighbor[k].first, s.neighbor[k].second)});
  w.output = DenseMatrix(s.out_rows, s.out_cols);
  return w;
}

ModelWeights init_weights(const KernelSpec& spec, std::size_t num_features, std::size_t num_labels,
                          std::uint64_t rng_seed) {
  const auto s = shapes_for(spec, num_features, num_labels);
  auto glorot = [&](std::size_t rows, std::size_t cols, std::uint64_t slot) {
    if (rows == 0 || cols == 0) return DenseMatrix(rows, cols);
    return glorot_init(rows, cols, derive_seed(rng_seed, {slot}));
  };
  ModelWeights w;
  w.input = glorot(s.in_rows, s.in_cols, 0);
  for (std::size_t k = 0; k < spec.depth; ++k) {
    LayerWeights layer;
    layer.node = glorot(s.node[k].first, s.node[k].second, 2 * k + 1);
    const auto [nr, nc] = s.neighbor[k];
    if (spec.psi == NeighborInput::HPrevAndLabels && nr > 0) {
      const std::size_t h_rows = nr - num_labels;
      DenseMatrix top = glorot(h_rows, nc, 2 * k + 2);
      DenseMatrix bottom = glorot_init(num_labels, nc, derive_seed(rng_seed, {2 * k + 2, 0x1abe15ULL}));
      layer.neighbor = DenseMatrix(nr, nc);
      std::copy(top.values().begin(), top.values().end(), layer.neighbor.values().begin());
      std::copy(bottom.values().begin(), bottom.values().end(),
                layer.neighbor.values().begin() + static_cast<std::ptrdiff_t>(top.size()));
    } else {
      layer.neighbor = glorot(nr, nc, 2 * k + 2);
    }
    w.layers.push_back(std::move(layer));
  }
  w.output = glorot(s.out_rows, s.out_cols, 0xfeedULL);
  return w;
}

std::uint64_t fingerprint(const ModelWeights& w) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto eat = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  w.for_each_slot([&](const DenseMatrix& m) {
    const std::uint64_t dims[2] = {m.rows(), m.cols()};
    eat(dims, sizeof dims);
    eat(m.values().data(), m.size() * sizeof(double));
  });
  return h;
}

void add_inplace(ModelWeights& dst, const ModelWeights& src, double scale) {
  std::vector<const DenseMatrix*> from;
  src.for_each_slot([&](const DenseMatrix& m) { from.push_back(&m); });
  std::size_t i = 0;
  dst.for_each_slot([&](DenseMatrix& m) {
    if (i >= from.size()) throw ShapeError("add_inplace: weight structures differ");
    add_inplace(m, *from[i++], scale);
  });
  if (i != from.size()) throw ShapeError("add_inplace: weight structures differ");
}

double max_abs_diff(const ModelWeights& a, const ModelWeights& b) {
  std::vector<const DenseMatrix*> bs;
  b.for_each_slot([&](const DenseMatrix& m) { bs.push_back(&m); });
  std::size_t i = 0;
  double worst = 0.0;
  a.for_each_slot([&](const DenseMatrix& m) {
    if (i >= bs.size()) throw ShapeError("max_abs_diff: weight structures differ");
    worst = std::max(worst, max_abs_diff(m, *bs[i++]));
  });
  if (i != bs.size()) throw ShapeError("max_abs_diff: weight structures differ");
  return worst;
}

namespace {
constexpr char kMagic[8] = {'H', 'O', 'P', 'F', 'W', 'T', 'S', '1'};
}

void save_weights(const std::filesystem::path& path, const ModelWeights& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write weights to " + path.string());
  std::vector<const DenseMatrix*> slots;
  w.for_each_slot([&](const DenseMatrix& m) { slots.push_back(&m); });
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t count = slots.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const auto* m : slots) {
    const std::uint64_t dims[2] = {m->rows(), m->cols()};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  }
  for (const auto* m : slots)
    out.write(reinterpret_cast<const char*>(m->values().data()),
              static_cast<std::streamsize>(m->size() * sizeof(double)));
  if (!out) throw IngestError("short write to " + path.string());
}

ModelWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open weights " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw IngestError(path.string() + ": bad magic");
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || count < 2 || count % 2 != 0 || count > (1u << 20)) throw IngestError(path.string() + ": bad slot count");
  std::vector<DenseMatrix> slots;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> dims(count);
  for (auto& [r, c] : dims) {
    std::uint64_t d[2];
    in.read(reinterpret_cast<char*>(d), sizeof d);
    r = d[0];
    c = d[1];
  }
  if (!in) throw IngestError(path.string() + ": truncated shape table");
  for (auto [r, c] : dims) {
    DenseMatrix m(r, c);
    in.read(reinterpret_cast<char*>(m.values().data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw IngestError(path.string() + ": truncated values");
    slots.push_back(std::move(m));
  }
  ModelWeights w;
  w.input = std::move(slots.front());
  for (std::size_t i = 1; i + 1 < slots.size(); i += 2) w.layers.push_back({std::move(slots[i]), std::move(slots[i + 1])});
  w.output = std::move(slots.back());
  return w;
}

}  // namespace hopf
