// SPDX-License-Identifier: Apache-2.0
#include "effsearch/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace effsearch {

std::string_view metric_field(Metric m) {
  switch (m) {
    case Metric::Accuracy: return "accuracy_pct";
    case Metric::Latency: return "latency_ms";
    case Metric::Memory: return "memory_gb";
    case Metric::Energy: return "energy_j";
  }
  return {};
}

double PerformanceVector::get(Metric m) const {
  switch (m) {
    case Metric::Accuracy: return accuracy_pct;
    case Metric::Latency: return latency_ms;
    case Metric::Memory: return memory_gb;
    case Metric::Energy: return energy_j;
  }
  return 0.0;
}

double& PerformanceVector::get(Metric m) {
  switch (m) {
    case Metric::Accuracy: return accuracy_pct;
    case Metric::Latency: return latency_ms;
    case Metric::Memory: return memory_gb;
    case Metric::Energy: break;
  }
  return energy_j;
}

bool is_valid(const PerformanceVector& p) {
  for (Metric m : kMetrics)
    if (!std::isfinite(p.get(m))) return false;
  return p.accuracy_pct >= 0.0 && p.accuracy_pct <= 100.0 && p.latency_ms > 0.0 &&
         p.memory_gb > 0.0 && p.energy_j > 0.0;
}

double PreferenceWeights::get(Metric m) const {
  switch (m) {
    case Metric::Accuracy: return acc;
    case Metric::Latency: return lat;
    case Metric::Memory: return mem;
    case Metric::Energy: return energy;
  }
  return 0.0;
}

bool is_valid(const PreferenceWeights& w) {
  bool any_positive = false;
  for (Metric m : kMetrics) {
    const double v = w.get(m);
    if (!std::isfinite(v) || v < 0.0) return false;
    any_positive = any_positive || v > 0.0;
  }
  return any_positive;
}

std::span<const NamedWeights> weight_presets() {
  static constexpr std::array<NamedWeights, 5> presets = {{
      {"balanced", {1.0, 1.0, 1.0, 1.0}},
      {"accuracy", {4.0, 1.0, 1.0, 1.0}},
      {"latency", {1.0, 4.0, 1.0, 1.0}},
      {"memory", {1.0, 1.0, 4.0, 1.0}},
      {"energy", {1.0, 1.0, 1.0, 4.0}},
  }};
  return presets;
}

NormalizationContext NormalizationContext::from(std::span<const PerformanceVector> reference_set,
                                                std::string reference_id) {
  NormalizationContext ctx;
  ctx.reference = std::move(reference_id);
  if (reference_set.empty()) return ctx;
  for (Metric m : kMetrics) {
    const auto i = static_cast<std::size_t>(m);
    ctx.lo[i] = ctx.hi[i] = reference_set.front().get(m);
    for (const auto& p : reference_set) {
      ctx.lo[i] = std::min(ctx.lo[i], p.get(m));
      ctx.hi[i] = std::max(ctx.hi[i], p.get(m));
    }
  }
  return ctx;
}

double derived_power_w(const PerformanceVector& p) {
  if (!(p.latency_ms > 0.0)) throw std::invalid_argument("latency must be positive to derive power");
  return p.energy_j / (p.latency_ms / 1000.0);
}

bool is_feasible(const PerformanceVector& p, const HardwareSpec& hw) {
  return p.memory_gb <= hw.memory_cap_gb && derived_power_w(p) <= hw.power_cap_w;
}

double constraint_violation(const PerformanceVector& p, const HardwareSpec& hw) {
  double v = 0.0;
  if (std::isfinite(hw.memory_cap_gb)) v += std::max(0.0, p.memory_gb / hw.memory_cap_gb - 1.0);
  if (std::isfinite(hw.power_cap_w)) v += std::max(0.0, derived_power_w(p) / hw.power_cap_w - 1.0);
  return v;
}

double normalize(double value, Metric m, const NormalizationContext& ctx) {
  const double lo = ctx.min(m);
  const double hi = ctx.max(m);
  if (!(hi > lo)) return 0.0;
  return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

double utility(const PerformanceVector& p, const PreferenceWeights& w,
               const NormalizationContext& ctx) {
  double u = w.acc * (p.accuracy_pct / 100.0);
  for (Metric m : kCostMetrics) u -= w.get(m) * normalize(p.get(m), m, ctx);
  return u;
}

bool dominates(const PerformanceVector& a, const PerformanceVector& b) {
  if (a.accuracy_pct < b.accuracy_pct || a.latency_ms > b.latency_ms ||
      a.memory_gb > b.memory_gb || a.energy_j > b.energy_j)
    return false;
  return a.accuracy_pct > b.accuracy_pct || a.latency_ms < b.latency_ms ||
         a.memory_gb < b.memory_gb || a.energy_j < b.energy_j;
}

double efficiency_score(const PerformanceVector& p, const PerformanceVector& baseline) {
  if (p == baseline) return 1.0;
  const double ratio = (baseline.latency_ms / p.latency_ms) * (baseline.memory_gb / p.memory_gb) *
                       (baseline.energy_j / p.energy_j);
  const double acc_factor =
      baseline.accuracy_pct > 0.0 ? std::min(1.0, p.accuracy_pct / baseline.accuracy_pct) : 1.0;
  return std::cbrt(ratio) * acc_factor;
}

}  // namespace effsearch
