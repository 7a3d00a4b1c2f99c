// SPDX-License-Identifier: Apache-2.0
//
// Deployment scenario presets. Quoted memory and latency figures are
// illustrative published targets, not outputs of any landscape here.
#pragma once

#include <span>
#include <string>

#include "effsearch/config_space.hpp"
#include "effsearch/descriptors.hpp"

namespace effsearch {

struct ScenarioPreset {
  std::string name;
  std::string summary;
  ModelDescriptor model;
  EfficiencyConfig config;
  double quoted_memory_gb = 0.0;
  double quoted_latency_ms = 0.0;
};

std::span<const ScenarioPreset> scenario_presets();

}  // namespace effsearch
