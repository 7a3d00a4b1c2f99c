// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace effsearch {

enum class Metric : std::uint8_t { Accuracy, Latency, Memory, Energy };
inline constexpr std::array<Metric, 4> kMetrics = {Metric::Accuracy, Metric::Latency,
                                                   Metric::Memory, Metric::Energy};
inline constexpr std::array<Metric, 3> kCostMetrics = {Metric::Latency, Metric::Memory,
                                                       Metric::Energy};

/// Serialized field name, e.g. "latency_ms".
std::string_view metric_field(Metric m);

/// Accuracy is maximized; latency, memory and energy are minimized.
struct PerformanceVector {
  double accuracy_pct = 0.0;
  double latency_ms = 1.0;
  double memory_gb = 1.0;
  double energy_j = 1.0;

  double get(Metric m) const;
  double& get(Metric m);
  bool operator==(const PerformanceVector&) const = default;
};

/// Finite, accuracy in [0, 100], strictly positive cost metrics.
bool is_valid(const PerformanceVector& p);

struct HardwareSpec {
  std::string name = "unconstrained";
  double memory_cap_gb = std::numeric_limits<double>::infinity();
  double power_cap_w = std::numeric_limits<double>::infinity();
};

struct PreferenceWeights {
  double acc = 1.0;
  double lat = 1.0;
  double mem = 1.0;
  double energy = 1.0;

  double get(Metric m) const;
  PreferenceWeights scaled(double k) const { return {acc * k, lat * k, mem * k, energy * k}; }
};

/// Nonnegative, finite, at least one positive.
bool is_valid(const PreferenceWeights& w);

struct NamedWeights {
  std::string_view name;
  PreferenceWeights weights;
};
/// Reporting presets used by generation logs.
std::span<const NamedWeights> weight_presets();

/// Per-metric (min, max) over a reference set of performance vectors.
struct NormalizationContext {
  std::array<double, 4> lo{};
  std::array<double, 4> hi{};
  std::string reference;  // identifier of the reference set

  static NormalizationContext from(std::span<const PerformanceVector> reference_set,
                                   std::string reference_id = {});
  double min(Metric m) const { return lo[static_cast<std::size_t>(m)]; }
  double max(Metric m) const { return hi[static_cast<std::size_t>(m)]; }
};

/// Average power in watts: energy per inference over latency.
/// Throws std::invalid_argument for non-positive latency.
double derived_power_w(const PerformanceVector& p);

bool is_feasible(const PerformanceVector& p, const HardwareSpec& hw);

/// Sum of relative cap overshoots, 0 when feasible.
double constraint_violation(const PerformanceVector& p, const HardwareSpec& hw);

/// (value - min) / (max - min) clamped to [0, 1]; 0 for a degenerate range.
double normalize(double value, Metric m, const NormalizationContext& ctx);

/// w_acc * accuracy/100 minus the weighted normalized cost metrics.
double utility(const PerformanceVector& p, const PreferenceWeights& w,
               const NormalizationContext& ctx);

/// Pareto dominance: no worse in every metric, strictly better in one.
bool dominates(const PerformanceVector& a, const PerformanceVector& b);

/// Geometric mean of baseline/current cost ratios, times min(1, acc/acc_baseline).
double efficiency_score(const PerformanceVector& p, const PerformanceVector& baseline);

}  // namespace effsearch
