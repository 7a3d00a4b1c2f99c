// SPDX-License-Identifier: Apache-2.0
#include "effsearch/presets.hpp"

#include <vector>

namespace effsearch {

namespace {

ModelDescriptor model(std::string name, double params, std::string family) {
  ModelDescriptor m;
  m.name = std::move(name);
  m.param_count = params;
  m.family = std::move(family);
  return m;
}

std::vector<ScenarioPreset> build() {
  return {
      {"mobile", "MQA attention, LoRA r=16, INT4", model("llama-2-7b", 7e9, "llama"),
       parse_canonical("arch=MQA+moe(dense)|ft=LoRA(r=16,a=2r)|inf=INT4/AWQ+kv=MQA"), 2.1, 45.0},
      {"cloud-api", "MLA attention, 8-expert MoE, RSLoRA r=64, FP16", model("llama-2-70b", 70e9, "llama"),
       parse_canonical("arch=MLA+moe(sparse,e=8,k=2)|ft=RSLoRA(r=64,a=2r)|inf=FP16+kv=Full"), 110.0, 180.0},
      {"research", "GQA attention, full fine-tuning, INT8", model("mistral-7b", 7e9, "mistral"),
       parse_canonical("arch=GQA+moe(dense)|ft=Full|inf=INT8/SmoothQuant+kv=GQA"), 12.0, 35.0},
  };
}

}  // namespace

std::span<const ScenarioPreset> scenario_presets() {
  static const std::vector<ScenarioPreset> presets = build();
  return presets;
}

}  // namespace effsearch
