#include "hopf_cli/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>

#include "hopf/error.hpp"
#include "hopf/format.hpp"

#ifndef HOPF_VERSION
#define HOPF_VERSION "unknown"
#endif
#ifndef HOPF_GIT_COMMIT
#define HOPF_GIT_COMMIT "unknown"
#endif

namespace hopf::cli {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256: digest init failed");
  }
  void update(std::string_view s) {
    if (EVP_DigestUpdate(ctx_.get(), s.data(), s.size()) != 1) throw std::runtime_error("sha256: update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw std::runtime_error("sha256: final failed");
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
      std::snprintf(buf, sizeof buf, "%02x", md[i]);
      out += buf;
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

void hash_matrix(Sha256& h, const DenseMatrix& m) {
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    line.clear();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) line += '\t';
      line += format_double(m(r, c));
    }
    line += '\n';
    h.update(line);
  }
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string dataset_fingerprint(const DatasetBundle& b) {
  Sha256 h;
  h.update(b.name + "\n" + std::string(to_string(b.task)) + "\n" + std::to_string(b.num_nodes()) + " " +
           std::to_string(b.num_features()) + " " + std::to_string(b.num_labels()) + "\n");
  auto edges = b.graph.edges();
  std::sort(edges.begin(), edges.end());
  std::string line;
  for (auto [u, v] : edges) {
    line = std::to_string(u) + "\t" + std::to_string(v) + "\n";
    h.update(line);
  }
  h.update("X\n");
  hash_matrix(h, b.x);
  h.update("Y\n");
  hash_matrix(h, b.y);
  return h.hex();
}

std::string code_version() { return std::string(HOPF_VERSION) + "+" + HOPF_GIT_COMMIT; }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [phase, s] : timings) t[phase] = s;
  return {{"command", command}, {"argv", argv},       {"code_version", code_version()},
          {"config", config},   {"seeds", seeds},     {"dataset", dataset},
          {"timings", t}};
}

void RunManifest::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

nlohmann::json describe_dataset(const DatasetBundle& b, const std::string& source) {
  return {{"source", source},
          {"name", b.name},
          {"n", b.num_nodes()},
          {"m", b.graph.num_edges()},
          {"f", b.num_features()},
          {"l", b.num_labels()},
          {"task", std::string(to_string(b.task))},
          {"sha256", dataset_fingerprint(b)}};
}

}  // namespace hopf::cli
