// SPDX-License-Identifier: Apache-2.0
//
// NSGA-II over the hierarchical configuration space: constraint-aware
// initialization, stage-wise crossover and mutation, constrained-dominance
// sorting with crowding-distance truncation, and a Pareto archive.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "effsearch/config_space.hpp"
#include "effsearch/evaluator.hpp"
#include "effsearch/hypervolume.hpp"
#include "effsearch/kernels.hpp"
#include "effsearch/pareto.hpp"
#include "effsearch/serialization.hpp"

namespace effsearch {

struct MutationRates {
  double arch = 0.1;
  double ft = 0.2;
  double inf = 0.15;
  double get(Stage s) const;
};

struct SearchParams {
  int population_size = 100;
  int generations = 50;
  double crossover_probability = 0.9;
  MutationRates mutation;
  int tournament_size = 3;
  std::uint64_t seed = 0;
  /// Rejection-sampling budget of the initializer, as a multiple of N.
  int init_attempts_factor = 50;
  /// Predicted memory and power are inflated by (1 + margin) before the cap check.
  double constraint_margin = 0.0;
  std::optional<std::size_t> archive_capacity;
  /// Execution of offspring evaluation for true evaluators (merged in
  /// offspring order); surrogate predictors batch with their own setting.
  Exec exec = Exec::Serial;
};

/// Throws std::invalid_argument on N < 4, odd N, G < 1, probabilities
/// outside [0, 1], tournament < 1 or negative margin.
void validate(const SearchParams& p);

struct Individual {
  EfficiencyConfig config;
  PerformanceVector objectives;
  bool feasible = true;
  double violation = 0.0;
  int front_rank = 0;
  double crowding = 0.0;
};

/// Feasible beats infeasible; two infeasible compare by violation; two
/// feasible compare by Pareto dominance.
bool constrained_dominates(const Individual& a, const Individual& b);

/// Sets front_rank and crowding of every member; returns the fronts.
Fronts rank_population(std::vector<Individual>& pop, Exec exec = Exec::Serial);

/// Scores a configuration with `predictor` against `hw` (with margin).
Individual make_individual(const EfficiencyConfig& c, const Evaluator& predictor, const HardwareSpec& hw,
                           double margin);

struct InitResult {
  std::vector<Individual> population;
  std::size_t attempts = 0;            // predictor calls spent
  std::size_t infeasible_members = 0;  // slots filled by least-violating candidates
};

/// Rejection-samples up to init_attempts_factor * N uniform configurations,
/// keeping predicted-feasible ones; any shortfall is filled by the rejected
/// candidates with the smallest violation.
InitResult constraint_aware_init(const ConfigSpace& space, const Evaluator& predictor, const HardwareSpec& hw,
                                 const SearchParams& params, Rng& rng);

/// Two children; with probability p_c each stage is mixed field by field
/// (child 2 takes the complementary choices), otherwise the parents are copied.
std::pair<EfficiencyConfig, EfficiencyConfig> hierarchical_crossover(const EfficiencyConfig& p1,
                                                                     const EfficiencyConfig& p2,
                                                                     double probability, Rng& rng);

/// Independently per stage, mutate_field with that stage's rate.
EfficiencyConfig stage_mutate(const EfficiencyConfig& c, const MutationRates& rates, const ConfigSpace& space,
                              Rng& rng);

/// k entrants drawn uniformly with replacement; lowest rank wins, then
/// highest crowding, then canonical config order. Returns an index.
std::size_t tournament_select(std::span<const Individual> pop, int k, Rng& rng);

struct GenerationRecord {
  int generation = 0;  // 0 = initial population
  std::size_t archive_size = 0;
  std::vector<PerformanceVector> archive;  // snapshot
};

struct SearchResult {
  ParetoArchive archive;
  std::vector<Individual> population;
  std::vector<GenerationRecord> generations;
  std::vector<PerformanceVector> evaluated_feasible;  // every predicted-feasible individual scored
  std::size_t predictor_calls = 0;
  std::size_t init_attempts = 0;
  std::size_t infeasible_init = 0;
};

/// Generational NSGA-II over `predictor` outputs. Predictor calls equal the
/// initializer's attempts plus N * G.
SearchResult run_search(const ConfigSpace& space, const Evaluator& predictor, const HardwareSpec& hw,
                        const SearchParams& params);

/// Generation log as JSON lines: a header with the hypervolume reference
/// point (from every predicted-feasible individual of the run), then one
/// record per generation with archive size, best utility per weight preset
/// and hypervolume.
std::vector<Json> generation_log(const SearchResult& result);
void write_generation_log(std::ostream& out, const SearchResult& result);

/// Archive export: canonical config, structured config, performance,
/// feasibility and provenance per member.
Json archive_json(const ParetoArchive& archive);
ParetoArchive archive_from_json(const Json& j);

}  // namespace effsearch
