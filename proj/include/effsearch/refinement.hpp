// SPDX-License-Identifier: Apache-2.0
//
// Measure-and-refine loop: surrogate-guided search, uncertainty-based
// selection of archive members, true evaluation and surrogate update.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "effsearch/config_space.hpp"
#include "effsearch/descriptors.hpp"
#include "effsearch/evaluator.hpp"
#include "effsearch/nsga2.hpp"
#include "effsearch/pareto.hpp"
#include "effsearch/serialization.hpp"
#include "effsearch/surrogate.hpp"

namespace effsearch {

struct RefinementParams {
  int initial_sample_size = 200;  // n0
  int iterations = 3;             // R
  int evaluations_per_iteration = 20;  // k
  SearchParams search;
  BoostingParams boosting;
  int ensemble_size = 5;
  std::uint64_t seed = 0;
  /// Refit from scratch once the training set grew by this fraction since
  /// the last fit; otherwise warm-start.
  double refit_growth = 0.25;
  int warm_extra_trees = 50;
  PreferenceWeights reporting_weights;
  Exec exec = Exec::Serial;
};

/// Throws std::invalid_argument on n0 < 10, R < 0, k < 1, E < 2 or invalid
/// search / boosting parameters.
void validate(const RefinementParams& p);

struct MeasuredRecord {
  EfficiencyConfig config;
  PerformanceVector perf;
  int iteration = 0;  // 0 = initial sample
};

struct SelectedRecord {
  EfficiencyConfig config;
  double uncertainty = 0.0;
  PerformanceVector predicted;
  PerformanceVector measured;
};

struct IterationRecord {
  int iteration = 0;
  std::size_t search_archive_size = 0;
  std::size_t predictor_calls = 0;
  std::vector<SelectedRecord> selected;
  /// Ensemble R^2 on the newly measured configs before the update; empty
  /// when undefined (fewer than two or constant targets).
  std::array<std::optional<double>, 4> holdout_r2;
  std::string update;  // "refit", "warm_start" or "none"
  std::size_t training_size = 0;
  std::optional<double> best_utility;
  std::vector<ArchiveEntry> archive;  // measured archive after the iteration
};

struct RefinementTrace {
  std::string space;
  std::string evaluator;
  ModelDescriptor model;
  TaskDescriptor task;
  HardwareSpec hardware;
  RefinementParams params;
  EfficiencyConfig baseline;
  IterationRecord initial;  // iteration 0: initial sample fit
  std::vector<IterationRecord> iterations;
  std::vector<MeasuredRecord> evaluations;  // every true evaluation, in order
  ParetoArchive final_archive;

  std::size_t true_evaluations() const { return evaluations.size(); }
  /// Measured performance of `c`, if it was evaluated.
  std::optional<PerformanceVector> measured(const EfficiencyConfig& c) const;
  /// Best utility at iteration r (0 = initial sample).
  std::optional<double> best_utility(int r) const;
};

/// Raised when the true evaluator fails; carries everything recorded so far.
class RefinementError : public std::runtime_error {
 public:
  RefinementError(const std::string& what, RefinementTrace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const RefinementTrace& partial_trace() const { return partial_; }

 private:
  RefinementTrace partial_;
};

struct RefinementResult {
  ParetoArchive archive;
  RefinementTrace trace;
  SurrogateEnsemble ensemble;
};

/// Draws n0 distinct uniform configurations (the space's first
/// configuration always included as the run baseline), evaluates them,
/// fits the ensemble, then runs R search / select / measure / update rounds.
/// The returned archive holds measured, feasible, mutually non-dominated
/// results only.
RefinementResult run_adaptive_optimization(const ConfigSpace& space, const Evaluator& evaluator,
                                           const HardwareSpec& hw, const ModelDescriptor& model,
                                           const TaskDescriptor& task, const RefinementParams& params);

/// Uncertainty score per member: sum over objectives of ensemble variance
/// divided by the squared range of that objective over `archive` (zero
/// range contributes 0).
std::vector<double> uncertainty_scores(std::span<const ObjectivePrediction> predictions,
                                       std::span<const PerformanceVector> archive);

/// The k archive members outside `already_measured` with the highest
/// uncertainty scores, ties in canonical order.
std::vector<EfficiencyConfig> select_topk_uncertain(const ParetoArchive& archive,
                                                    const SurrogateEnsemble& ensemble,
                                                    const ModelDescriptor& model, const TaskDescriptor& task,
                                                    const std::set<EfficiencyConfig>& already_measured,
                                                    std::size_t k);

/// Measures every predicted member (measured members keep their vectors) and
/// keeps the measured-feasible, mutually non-dominated ones. Members whose
/// evaluation fails are skipped with a warning.
ParetoArchive final_validate(const ParetoArchive& archive, const Evaluator& evaluator, const HardwareSpec& hw,
                             const WarningSink& warn = {});

/// Best utility over the measured-feasible records, with the normalization
/// context built from all records.
std::optional<double> best_measured_utility(const std::vector<MeasuredRecord>& records, const HardwareSpec& hw,
                                            const PreferenceWeights& w);

/// Best utility among measured-feasible records of iterations 0..r, for
/// r = 0..R, all under one context built from every record of the run.
std::vector<std::optional<double>> utility_trend(const RefinementTrace& t, const PreferenceWeights& w);

Json trace_json(const RefinementTrace& t);
RefinementTrace trace_from_json(const Json& j);
void write_trace(std::ostream& out, const RefinementTrace& t);
RefinementTrace read_trace(const std::string& path);

}  // namespace effsearch
