// SPDX-License-Identifier: Apache-2.0
//
// Non-dominated sorting, crowding distance, Pareto archives and the
// exhaustive front oracle.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "effsearch/config_space.hpp"
#include "effsearch/evaluator.hpp"
#include "effsearch/kernels.hpp"
#include "effsearch/objectives.hpp"

namespace effsearch {

using Fronts = std::vector<std::vector<std::size_t>>;
using DominanceFn = std::function<bool(std::size_t, std::size_t)>;

/// Deb's fast non-dominated sort under an arbitrary strict dominance
/// relation. Front 0 is the non-dominated set; indices within a front are
/// ascending.
Fronts fast_nondominated_sort(std::size_t n, const DominanceFn& dominates, Exec exec = Exec::Serial);
Fronts fast_nondominated_sort(std::span<const PerformanceVector> points, Exec exec = Exec::Serial);

/// Crowding distance of each member of a front. Per objective the members
/// are stably sorted by value, ties by canonical config order; boundary
/// members get +infinity; objectives with zero range contribute 0.
std::vector<double> crowding_distance(std::span<const PerformanceVector> front,
                                      std::span<const EfficiencyConfig> configs);

/// Indices of the mutually non-dominated members, ascending.
std::vector<std::size_t> nondominated_indices(std::span<const PerformanceVector> points);

struct ArchiveEntry {
  EfficiencyConfig config;
  PerformanceVector perf;
  bool feasible = true;
  bool measured = false;  // true when perf came from an evaluator
};

/// Mutually non-dominated set with unique configs. Unbounded unless a
/// capacity is given; over capacity, the most crowded member is dropped.
class ParetoArchive {
 public:
  explicit ParetoArchive(std::optional<std::size_t> capacity = std::nullopt);

  /// Inserts unless the config is present or the candidate is dominated;
  /// evicts members the candidate dominates. Returns whether it was inserted.
  bool insert(const ArchiveEntry& candidate);
  bool contains(const EfficiencyConfig& c) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  /// Members in canonical config order.
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::vector<PerformanceVector> performances() const;
  std::optional<std::size_t> capacity() const { return capacity_; }

 private:
  std::vector<ArchiveEntry> entries_;
  std::optional<std::size_t> capacity_;
};

/// Called with human-readable warnings (oversized enumerations, skipped
/// evaluations).
using WarningSink = std::function<void(const std::string&)>;

struct ExhaustiveResult {
  ParetoArchive front;
  std::size_t evaluated = 0;
  std::size_t feasible = 0;
};

/// Evaluates every configuration of `space` and returns the exact Pareto
/// front of the feasible ones.
ExhaustiveResult exhaustive_pareto(const ConfigSpace& space, const Evaluator& evaluator,
                                   const HardwareSpec& hw, Exec exec = Exec::Parallel,
                                   const WarningSink& warn = {});

/// evaluator.evaluate over `configs`, results by index.
std::vector<PerformanceVector> evaluate_all(std::span<const EfficiencyConfig> configs,
                                            const Evaluator& evaluator, Exec exec);

}  // namespace effsearch
