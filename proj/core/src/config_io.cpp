#include "hopf/config_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hopf/error.hpp"

namespace hopf {

using nlohmann::json;

namespace {

json train_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"hidden_dim", c.hidden_dim},
          {"learning_rate", c.learning_rate},
          {"l2_weight", c.l2_weight},
          {"dropout_rate", c.dropout_rate},
          {"max_epochs", c.max_epochs},
          {"min_epochs", c.min_epochs},
          {"patience", c.patience},
          {"max_consecutive_exhaustions", c.max_consecutive_exhaustions},
          {"use_wce", c.use_wce},
          {"rng_seed", c.rng_seed},
          {"sample_caps", c.sample_caps},
          {"num_workers", c.num_workers}};
}

json hopf_json(const HopfConfig& c) {
  return {{"C", c.C},
          {"T", c.T},
          {"warm_start", c.warm_start},
          {"theta_mode", "labels"},
          {"shifted_averaging", c.shifted_averaging},
          {"retain_all_weights", c.retain_all_weights}};
}

template <class T>
void take(const json& j, const char* key, T& out) {
  try {
    out = j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const RunConfig& defaults) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c = defaults;
  auto& t = c.train;
  auto& h = c.hopf;
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "batch_size") take(v, k, t.batch_size);
    else if (key == "hidden_dim") take(v, k, t.hidden_dim);
    else if (key == "learning_rate") take(v, k, t.learning_rate);
    else if (key == "l2_weight") take(v, k, t.l2_weight);
    else if (key == "dropout_rate") take(v, k, t.dropout_rate);
    else if (key == "max_epochs") take(v, k, t.max_epochs);
    else if (key == "min_epochs") take(v, k, t.min_epochs);
    else if (key == "patience") take(v, k, t.patience);
    else if (key == "max_consecutive_exhaustions") take(v, k, t.max_consecutive_exhaustions);
    else if (key == "use_wce") take(v, k, t.use_wce);
    else if (key == "rng_seed") take(v, k, t.rng_seed);
    else if (key == "sample_caps") take(v, k, t.sample_caps);
    else if (key == "num_workers") take(v, k, t.num_workers);
    else if (key == "C") take(v, k, h.C);
    else if (key == "T") take(v, k, h.T);
    else if (key == "warm_start") take(v, k, h.warm_start);
    else if (key == "shifted_averaging") take(v, k, h.shifted_averaging);
    else if (key == "retain_all_weights") take(v, k, h.retain_all_weights);
    else if (key == "theta_mode") {
      std::string mode;
      take(v, k, mode);
      if (mode != "labels") throw ConfigError("config key 'theta_mode': only \"labels\" is supported");
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  t.validate();
  h.validate();
  return c;
}

RunConfig read_run_config(const std::filesystem::path& path, const RunConfig& defaults) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), defaults);
}

std::string to_json(const TrainConfig& c) { return train_json(c).dump(2); }
std::string to_json(const HopfConfig& c) { return hopf_json(c).dump(2); }

std::string to_json(const RunConfig& c) {
  json j = train_json(c.train);
  j.update(hopf_json(c.hopf));
  return j.dump(2);
}

}  // namespace hopf
