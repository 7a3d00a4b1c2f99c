// SPDX-License-Identifier: Apache-2.0
#include "effsearch/descriptors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace effsearch {

std::size_t ModelDescriptor::family_slot() const {
  std::string lower = family;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::size_t i = 0; i < kModelFamilies.size(); ++i) {
    if (kModelFamilies[i] == lower) return i;
  }
  return kModelFamilies.size() - 1;
}

std::string_view to_string(TaskDomain d) {
  switch (d) {
    case TaskDomain::LanguageUnderstanding: return "language-understanding";
    case TaskDomain::Generation: return "generation";
    case TaskDomain::LongContext: return "long-context";
    case TaskDomain::MultiTurn: return "multi-turn";
  }
  return "generation";
}

TaskDomain parse_task_domain(std::string_view s) {
  for (auto d : {TaskDomain::LanguageUnderstanding, TaskDomain::Generation, TaskDomain::LongContext,
                 TaskDomain::MultiTurn}) {
    if (to_string(d) == s) return d;
  }
  throw std::invalid_argument("unknown task domain: " + std::string(s));
}

void validate(const ModelDescriptor& m) {
  if (!(m.param_count > 0.0) || !std::isfinite(m.param_count))
    throw std::invalid_argument("model param_count must be positive");
  if (m.layer_count < 0 || m.hidden_dim < 0)
    throw std::invalid_argument("model layer_count/hidden_dim must be >= 0");
}

void validate(const TaskDescriptor& t) {
  if (!(t.difficulty >= 0.0 && t.difficulty <= 1.0))
    throw std::invalid_argument("task difficulty must lie in [0, 1]");
  if (t.sequence_length <= 0) throw std::invalid_argument("task sequence_length must be positive");
}

}  // namespace effsearch
