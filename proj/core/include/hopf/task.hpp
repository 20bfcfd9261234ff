#pragma once

#include <string_view>

namespace hopf {

// Multi-class: one-hot rows, softmax head. Multi-label: binary rows, sigmoid head.
enum class TaskKind { MultiClass, MultiLabel };

constexpr std::string_view to_string(TaskKind t) noexcept {
  return t == TaskKind::MultiClass ? "multi_class" : "multi_label";
}

}  // namespace hopf
