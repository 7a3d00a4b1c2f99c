// SPDX-License-Identifier: Apache-2.0
#include "effsearch/pareto.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace effsearch {

Fronts fast_nondominated_sort(std::size_t n, const DominanceFn& dominates, Exec exec) {
  const auto m = exec == Exec::Parallel ? kernels::dominance_matrix_parallel(n, dominates)
                                        : kernels::dominance_matrix_serial(n, dominates);
  std::vector<std::size_t> dominated_by(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dominated_by[j] += m[i * n + j];
  Fronts fronts;
  std::vector<std::size_t> current;
  for (std::size_t j = 0; j < n; ++j)
    if (dominated_by[j] == 0) current.push_back(j);
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current)
      for (std::size_t j = 0; j < n; ++j)
        if (m[i * n + j] && --dominated_by[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

Fronts fast_nondominated_sort(std::span<const PerformanceVector> points, Exec exec) {
  return fast_nondominated_sort(
      points.size(), [&](std::size_t a, std::size_t b) { return dominates(points[a], points[b]); }, exec);
}

std::vector<double> crowding_distance(std::span<const PerformanceVector> front,
                                      std::span<const EfficiencyConfig> configs) {
  const std::size_t n = front.size();
  if (configs.size() != n) throw std::invalid_argument("crowding_distance: length mismatch");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n, 0.0);
  if (n <= 2) {
    std::fill(d.begin(), d.end(), inf);
    return d;
  }
  std::vector<std::size_t> order(n);
  for (Metric m : kMetrics) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = front[a].get(m), vb = front[b].get(m);
      if (va != vb) return va < vb;
      return configs[a] < configs[b];
    });
    const double lo = front[order.front()].get(m);
    const double hi = front[order.back()].get(m);
    const double range = hi - lo;
    if (!(range > 0.0)) continue;
    d[order.front()] = inf;
    d[order.back()] = inf;
    for (std::size_t k = 1; k + 1 < n; ++k)
      d[order[k]] += (front[order[k + 1]].get(m) - front[order[k - 1]].get(m)) / range;
  }
  return d;
}

std::vector<std::size_t> nondominated_indices(std::span<const PerformanceVector> points) {
  // Lexicographic order guarantees every dominator precedes what it dominates,
  // so each candidate only needs checking against the front built so far.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [&](std::size_t i) {
    const auto& p = points[i];
    return std::array<double, 4>{-p.accuracy_pct, p.latency_ms, p.memory_gb, p.energy_j};
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<std::size_t> front;
  for (std::size_t i : order) {
    const bool dominated = std::any_of(front.begin(), front.end(),
                                       [&](std::size_t f) { return dominates(points[f], points[i]); });
    if (!dominated) front.push_back(i);
  }
  std::sort(front.begin(), front.end());
  return front;
}

ParetoArchive::ParetoArchive(std::optional<std::size_t> capacity) : capacity_(capacity) {
  if (capacity_ && *capacity_ == 0) throw std::invalid_argument("archive capacity must be >= 1");
}

bool ParetoArchive::contains(const EfficiencyConfig& c) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                                   [](const ArchiveEntry& e, const EfficiencyConfig& k) { return e.config < k; });
  return it != entries_.end() && it->config == c;
}

bool ParetoArchive::insert(const ArchiveEntry& candidate) {
  if (contains(candidate.config)) return false;
  for (const auto& e : entries_)
    if (dominates(e.perf, candidate.perf)) return false;
  std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(candidate.perf, e.perf); });
  const auto pos = std::lower_bound(
      entries_.begin(), entries_.end(), candidate.config,
      [](const ArchiveEntry& e, const EfficiencyConfig& k) { return e.config < k; });
  entries_.insert(pos, candidate);
  while (capacity_ && entries_.size() > *capacity_) {
    std::vector<PerformanceVector> perf;
    std::vector<EfficiencyConfig> configs;
    for (const auto& e : entries_) {
      perf.push_back(e.perf);
      configs.push_back(e.config);
    }
    const auto d = crowding_distance(perf, configs);
    std::size_t worst = 0;
    for (std::size_t i = 1; i < d.size(); ++i)
      if (d[i] <= d[worst]) worst = i;
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  return contains(candidate.config);
}

std::vector<PerformanceVector> ParetoArchive::performances() const {
  std::vector<PerformanceVector> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.perf);
  return out;
}

std::vector<PerformanceVector> evaluate_all(std::span<const EfficiencyConfig> configs,
                                            const Evaluator& evaluator, Exec exec) {
  return kernels::map_index<PerformanceVector>(configs.size(), exec,
                                               [&](std::size_t i) { return evaluator.evaluate(configs[i]); });
}

ExhaustiveResult exhaustive_pareto(const ConfigSpace& space, const Evaluator& evaluator,
                                   const HardwareSpec& hw, Exec exec, const WarningSink& warn) {
  if (space.size() > 1'000'000 && warn)
    warn("exhaustive enumeration of " + std::to_string(space.size()) + " configurations");
  const auto configs = enumerate(space);
  const auto perf = evaluate_all(configs, evaluator, exec);
  ExhaustiveResult out;
  out.evaluated = configs.size();
  std::vector<std::size_t> feasible;
  std::vector<PerformanceVector> feasible_perf;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (!is_feasible(perf[i], hw)) continue;
    feasible.push_back(i);
    feasible_perf.push_back(perf[i]);
  }
  out.feasible = feasible.size();
  for (std::size_t k : nondominated_indices(feasible_perf)) {
    const std::size_t i = feasible[k];
    out.front.insert(ArchiveEntry{configs[i], perf[i], true, true});
  }
  return out;
}

}  // namespace effsearch
