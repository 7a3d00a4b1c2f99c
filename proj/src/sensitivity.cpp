// SPDX-License-Identifier: Apache-2.0
#include "effsearch/sensitivity.hpp"

#include <ostream>

#include "effsearch/replay.hpp"

namespace effsearch {

std::vector<SensitivityRow> sensitivity(const EfficiencyConfig& config, const ConfigSpace& space,
                                        const PerformanceFn& perf, const PreferenceWeights& weights,
                                        const NormalizationContext& ctx, bool predicted) {
  if (!validate(config, space)) throw std::invalid_argument("configuration outside the space");
  std::vector<SensitivityRow> rows;
  for (Axis a : kAxes) {
    const auto current = axis_value(config, a);
    for (int code : space.allowed(a)) {
      const auto swept = with_axis_value(config, a, code, space);
      if (!swept) continue;
      SensitivityRow row{a, code, axis_value_label(a, code), *swept, perf(*swept), 0.0,
                         current && *current == code, predicted};
      row.utility = utility(row.perf, weights, ctx);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityRow>& rows) {
  out << "axis,value,config,accuracy_pct,latency_ms,memory_gb,energy_j,utility,current,predicted\n";
  for (const auto& r : rows) {
    out << axis_name(r.axis) << ',' << csv_field(r.label) << ',' << csv_field(to_canonical(r.config)) << ','
        << format_number(r.perf.accuracy_pct) << ',' << format_number(r.perf.latency_ms) << ','
        << format_number(r.perf.memory_gb) << ',' << format_number(r.perf.energy_j) << ','
        << format_number(r.utility) << ',' << (r.current ? 1 : 0) << ',' << (r.predicted ? 1 : 0) << '\n';
  }
}

Json sensitivity_json(const std::vector<SensitivityRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back({{"axis", axis_name(r.axis)},
                   {"value", r.label},
                   {"config", to_canonical(r.config)},
                   {"performance", r.perf},
                   {"utility", r.utility},
                   {"current", r.current},
                   {"predicted", r.predicted}});
  return out;
}

}  // namespace effsearch
