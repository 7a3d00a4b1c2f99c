// SPDX-License-Identifier: Apache-2.0
//
// One-axis-at-a-time sweeps around a configuration.
#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "effsearch/config_space.hpp"
#include "effsearch/objectives.hpp"
#include "effsearch/serialization.hpp"

namespace effsearch {

using PerformanceFn = std::function<PerformanceVector(const EfficiencyConfig&)>;

struct SensitivityRow {
  Axis axis;
  int code;
  std::string label;
  EfficiencyConfig config;
  PerformanceVector perf;
  double utility = 0.0;
  bool current = false;    // the swept value equals the input's value
  bool predicted = false;  // perf came from a surrogate
};

/// For every axis, sets that axis to each allowed value (switching variants
/// where needed) and reports metrics and utility. Axes inactive in `config`
/// (e.g. rank under full fine-tuning) have no current row. Values whose
/// variant cannot be activated in `space` (top-k in a dense-only space) are
/// skipped.
std::vector<SensitivityRow> sensitivity(const EfficiencyConfig& config, const ConfigSpace& space,
                                        const PerformanceFn& perf, const PreferenceWeights& weights,
                                        const NormalizationContext& ctx, bool predicted);

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityRow>& rows);
Json sensitivity_json(const std::vector<SensitivityRow>& rows);

}  // namespace effsearch
