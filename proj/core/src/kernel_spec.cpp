#include "hopf/kernel_spec.hpp"

#include <algorithm>

#include "hopf/error.hpp"

namespace hopf {

std::size_t KernelSpec::layer_width(std::size_t k) const noexcept {
  if (k == 0) return hidden_dim;
  const bool both = has_node_path() && has_neighbor_path();
  return (combine == Combine::Concat && both) ? 2 * hidden_dim : hidden_dim;
}

std::size_t KernelSpec::node_input_width(std::size_t k) const noexcept {
  if (!has_node_path()) return 0;
  return phi == NodeInput::H0 ? layer_width(0) : layer_width(k - 1);
}

std::size_t KernelSpec::neighbor_input_width(std::size_t k, std::size_t num_labels) const noexcept {
  if (!has_neighbor_path()) return 0;
  switch (psi) {
    case NeighborInput::HPrev: return layer_width(k - 1);
    case NeighborInput::Labels: return num_labels;
    case NeighborInput::HPrevAndLabels: return layer_width(k - 1) + num_labels;
    case NeighborInput::None: return 0;
  }
  return 0;
}

void KernelSpec::validate() const {
  if (depth == 0) throw ConfigError(name + ": depth must be >= 1");
  if (hidden_dim == 0) throw ConfigError(name + ": hidden_dim must be >= 1");
  if (activations.size() != depth)
    throw ConfigError(name + ": expected " + std::to_string(depth) + " layer activations");
  if (!has_node_path() && !has_neighbor_path()) throw ConfigError(name + ": both propagation paths are disabled");
  if (tie_weights) {
    if (!has_node_path() || !has_neighbor_path())
      throw ConfigError(name + ": weight tying needs both node and neighbor paths");
    for (std::size_t k = 1; k <= depth; ++k)
      if (node_input_width(k) != neighbor_input_width(k, 0) || psi != NeighborInput::HPrev)
        throw ConfigError(name + ": tied weights need equal node and neighbor input widths");
  }
  if (skip_connections) {
    for (std::size_t k = 1; k <= depth; ++k)
      if (layer_width(k) != layer_width(k - 1))
        throw ConfigError(name + ": skip connections need equal layer widths (concat combine doubles them)");
  }
  if (project_first_skip && (!skip_connections || !has_node_path()))
    throw ConfigError(name + ": projected first skip needs skip connections and a node path");
}

namespace {

KernelSpec base(std::string name, std::size_t depth, std::size_t hidden_dim) {
  KernelSpec s;
  s.name = std::move(name);
  s.depth = depth;
  s.hidden_dim = hidden_dim;
  s.activations.assign(depth, Activation::Relu);
  return s;
}

}  // namespace

KernelSpec KernelSpec::bl_node(std::size_t depth, std::size_t hidden_dim) {
  auto s = base("bl_node", depth, hidden_dim);
  s.phi = NodeInput::H0;
  s.psi = NeighborInput::None;
  s.beta = BetaMode::Zero;
  s.skip_connections = true;
  return s;
}

KernelSpec KernelSpec::bl_neigh(std::size_t depth, std::size_t hidden_dim) {
  auto s = base("bl_neigh", depth, hidden_dim);
  s.phi = NodeInput::None;
  s.alpha = AlphaMode::Zero;
  s.psi = NeighborInput::HPrev;
  s.norm = NormScheme::Mean;
  return s;
}

KernelSpec KernelSpec::ss_ica(std::size_t hidden_dim) {
  auto s = base("ss_ica", 1, hidden_dim);
  s.phi = NodeInput::H0;
  s.psi = NeighborInput::Labels;
  s.norm = NormScheme::Mean;
  s.iterative = true;
  return s;
}

KernelSpec KernelSpec::wl(std::size_t depth) {
  auto s = base("wl", depth, 1);
  s.phi = NodeInput::HPrev;
  s.psi = NeighborInput::HPrev;
  s.norm = NormScheme::Count;
  s.differentiable = false;
  std::fill(s.activations.begin(), s.activations.end(), Activation::Identity);
  return s;
}

KernelSpec KernelSpec::gcn(std::size_t depth, std::size_t hidden_dim) {
  auto s = base("gcn", depth, hidden_dim);
  s.norm = NormScheme::SymSelf;
  s.alpha = AlphaMode::InvDegSelf;
  s.tie_weights = true;
  return s;
}

KernelSpec KernelSpec::gcn_s(std::size_t depth, std::size_t hidden_dim) {
  auto s = gcn(depth, hidden_dim);
  s.name = "gcn_s";
  s.skip_connections = true;
  s.project_first_skip = true;
  return s;
}

KernelSpec KernelSpec::gcn_mean(std::size_t depth, std::size_t hidden_dim) {
  auto s = base("gcn_mean", depth, hidden_dim);
  s.norm = NormScheme::Mean;
  s.tie_weights = true;
  s.skip_connections = true;
  return s;
}

KernelSpec KernelSpec::gs_mean(std::size_t depth, std::size_t hidden_dim) {
  auto s = base("gs_mean", depth, hidden_dim);
  s.norm = NormScheme::Mean;
  s.combine = Combine::Concat;
  return s;
}

KernelSpec KernelSpec::gs_max(std::size_t depth, std::size_t hidden_dim) {
  auto s = gs_mean(depth, hidden_dim);
  s.name = "gs_max";
  s.norm = NormScheme::MaxPool;
  return s;
}

KernelSpec KernelSpec::nip_mean(std::size_t depth, std::size_t hidden_dim) {
  auto s = base("nip_mean", depth, hidden_dim);
  s.phi = NodeInput::H0;
  s.norm = NormScheme::Mean;
  s.skip_connections = true;
  return s;
}

KernelSpec KernelSpec::i_nip_mean(std::size_t depth, std::size_t hidden_dim) {
  auto s = nip_mean(depth, hidden_dim);
  s.name = "i_nip_mean";
  s.psi = NeighborInput::HPrevAndLabels;
  s.iterative = true;
  return s;
}

const std::vector<std::string>& kernel_names() {
  static const std::vector<std::string> names = {"bl_node", "bl_neigh", "ss_ica",   "wl",       "gcn",       "gcn_s",
                                                 "gcn_mean", "gs_mean", "gs_max", "nip_mean", "i_nip_mean"};
  return names;
}

bool is_kernel_name(std::string_view name) {
  const auto& names = kernel_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

KernelSpec make_kernel(std::string_view name, std::size_t depth, std::size_t hidden_dim) {
  KernelSpec s;
  if (name == "bl_node") s = KernelSpec::bl_node(depth, hidden_dim);
  else if (name == "bl_neigh") s = KernelSpec::bl_neigh(depth, hidden_dim);
  else if (name == "ss_ica") {
    if (depth != 1) throw ConfigError("ss_ica is a single-layer kernel (depth 1), got depth " + std::to_string(depth));
    s = KernelSpec::ss_ica(hidden_dim);
  } else if (name == "wl") s = KernelSpec::wl(depth);
  else if (name == "gcn") s = KernelSpec::gcn(depth, hidden_dim);
  else if (name == "gcn_s") s = KernelSpec::gcn_s(depth, hidden_dim);
  else if (name == "gcn_mean") s = KernelSpec::gcn_mean(depth, hidden_dim);
  else if (name == "gs_mean") s = KernelSpec::gs_mean(depth, hidden_dim);
  else if (name == "gs_max") s = KernelSpec::gs_max(depth, hidden_dim);
  else if (name == "nip_mean") s = KernelSpec::nip_mean(depth, hidden_dim);
  else if (name == "i_nip_mean") s = KernelSpec::i_nip_mean(depth, hidden_dim);
  else throw ConfigError("unknown model '" + std::string(name) + "'");
  s.validate();
  return s;
}

const char* to_string(NodeInput v) noexcept {
  switch (v) {
    case NodeInput::H0: return "h0";
    case NodeInput::HPrev: return "h_prev";
    case NodeInput::None: return "none";
  }
  return "?";
}

const char* to_string(NeighborInput v) noexcept {
  switch (v) {
    case NeighborInput::HPrev: return "h_prev";
    case NeighborInput::Labels: return "labels";
    case NeighborInput::HPrevAndLabels: return "h_prev+labels";
    case NeighborInput::None: return "none";
  }
  return "?";
}

const char* to_string(AlphaMode v) noexcept {
  switch (v) {
    case AlphaMode::One: return "1";
    case AlphaMode::InvDegSelf: return "(D+I)^-1";
    case AlphaMode::Zero: return "0";
  }
  return "?";
}

const char* to_string(BetaMode v) noexcept { return v == BetaMode::One ? "1" : "0"; }

const char* to_string(Combine v) noexcept { return v == Combine::Sum ? "sum" : "concat"; }

}  // namespace hopf
