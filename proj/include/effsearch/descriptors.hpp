// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace effsearch {

// Model families with a dedicated one-hot slot; anything else maps to "other".
inline constexpr std::array<std::string_view, 6> kModelFamilies = {"llama", "mistral", "qwen",
                                                                   "phi",   "gemma",   "other"};

struct ModelDescriptor {
  std::string name = "llama-2-7b";
  double param_count = 7e9;
  std::string family = "llama";
  int layer_count = 0;  // 0 if unknown
  int hidden_dim = 0;   // 0 if unknown

  double params_billions() const { return param_count / 1e9; }
  std::size_t family_slot() const;
};

enum class TaskDomain : std::uint8_t { LanguageUnderstanding, Generation, LongContext, MultiTurn };
inline constexpr std::size_t kTaskDomainCount = 4;

struct TaskDescriptor {
  std::string name = "generation";
  TaskDomain domain = TaskDomain::Generation;
  double difficulty = 0.5;  // [0, 1]
  int sequence_length = 512;
};

std::string_view to_string(TaskDomain d);
TaskDomain parse_task_domain(std::string_view s);

/// Throws std::invalid_argument when a descriptor violates its invariants.
void validate(const ModelDescriptor& m);
void validate(const TaskDescriptor& t);

}  // namespace effsearch
