// SPDX-License-Identifier: Apache-2.0
//
// Least-squares gradient-boosted regression trees and the per-objective
// bagged ensembles used as performance surrogates.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "effsearch/config_space.hpp"
#include "effsearch/kernels.hpp"
#include "effsearch/objectives.hpp"

namespace effsearch {

struct BoostingParams {
  int n_estimators = 500;
  int max_depth = 8;
  double learning_rate = 0.05;
  double subsample = 0.8;
  double colsample = 0.8;
  int min_samples_leaf = 1;
  bool operator==(const BoostingParams&) const = default;
};

void validate(const BoostingParams& p);

struct TrainingSample {
  FeatureVector features{};
  PerformanceVector observed;
  EfficiencyConfig config;
};

std::vector<TrainingSample> make_samples(std::span<const EfficiencyConfig> configs,
                                         std::span<const PerformanceVector> observed,
                                         const ModelDescriptor& model, const TaskDescriptor& task);

/// Flat binary tree; node 0 is the root. Internal nodes route
/// `x[feature] <= threshold` to `left`.
class RegressionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    bool operator==(const Node&) const = default;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(const FeatureVector& x) const {
    std::int32_t i = 0;
    while (nodes_[i].feature >= 0)
      i = x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left
                                                                                 : nodes_[i].right;
    return nodes_[i].value;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;
  std::size_t leaf_count() const;
  double max_abs_leaf() const;
  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

class BoostedModel {
 public:
  BoostedModel() = default;
  BoostedModel(double base, double shrinkage, std::vector<RegressionTree> trees)
      : base_(base), shrinkage_(shrinkage), trees_(std::move(trees)) {}

  double predict(const FeatureVector& x) const { return predict_prefix(x, trees_.size()); }
  /// Prediction using only the first `tree_count` trees.
  double predict_prefix(const FeatureVector& x, std::size_t tree_count) const;
  /// Same values as predict() on each row, evaluated tree by tree.
  std::vector<double> predict_batch(std::span<const FeatureVector> xs) const;

  double base_prediction() const { return base_; }
  double shrinkage() const { return shrinkage_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  void append(RegressionTree t) { trees_.push_back(std::move(t)); }
  bool operator==(const BoostedModel&) const = default;

 private:
  double base_ = 0.0;
  double shrinkage_ = 0.05;
  std::vector<RegressionTree> trees_;
};

/// Fits `params.n_estimators` trees to squared-error residuals, each on a
/// row- and column-subsampled view. Greedy variance-reduction splits; ties go
/// to the lowest feature index, then the lowest threshold. Deterministic in
/// `seed`. Throws std::invalid_argument for fewer than two rows or
/// non-finite targets.
BoostedModel fit_boosted(std::span<const FeatureVector> x, std::span<const double> y,
                         const BoostingParams& params, std::uint64_t seed);
BoostedModel fit_boosted(std::span<const TrainingSample> samples, Metric target,
                         const BoostingParams& params, std::uint64_t seed);

/// Appends up to `extra_trees` residual trees fitted on (x, y) only.
void continue_boosting(BoostedModel& model, std::span<const FeatureVector> x,
                       std::span<const double> y, const BoostingParams& params, int extra_trees,
                       std::uint64_t seed);

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
};
using ObjectivePrediction = std::array<MeanVar, 4>;

/// Ensemble of boosted models per objective (accuracy, latency, memory, energy).
class SurrogateEnsemble {
 public:
  SurrogateEnsemble() = default;
  SurrogateEnsemble(BoostingParams params, std::array<std::vector<BoostedModel>, 4> members,
                    std::uint64_t schema_hash = feature_schema_hash());

  std::size_t size() const { return members_[0].size(); }
  const BoostingParams& params() const { return params_; }
  std::uint64_t schema_hash() const { return schema_hash_; }
  const std::vector<BoostedModel>& members(Metric m) const {
    return members_[static_cast<std::size_t>(m)];
  }
  std::vector<BoostedModel>& members(Metric m) { return members_[static_cast<std::size_t>(m)]; }

  /// Sample mean and population variance across members, per objective.
  ObjectivePrediction predict_mean_var(const FeatureVector& x) const;
  /// Raw ensemble means per objective (no clamping).
  PerformanceVector predict_mean(const FeatureVector& x) const;
  /// predict_mean_var over many rows; members may run concurrently.
  std::vector<ObjectivePrediction> predict_mean_var_batch(std::span<const FeatureVector> xs,
                                                          Exec exec = Exec::Serial) const;

  bool operator==(const SurrogateEnsemble&) const = default;

 private:
  BoostingParams params_;
  std::array<std::vector<BoostedModel>, 4> members_;
  std::uint64_t schema_hash_ = 0;
};

/// Seed of member `member` for objective `m`, derived from `master_seed`.
std::uint64_t member_seed(std::uint64_t master_seed, Metric m, std::size_t member);

/// Each member bootstraps the rows with its own seed, then boosts.
SurrogateEnsemble fit_ensemble(std::span<const TrainingSample> samples, std::size_t ensemble_size,
                               const BoostingParams& params, std::uint64_t master_seed,
                               Exec exec = Exec::Parallel);

/// Explicit per-member seeds (index = member), shared across objectives.
SurrogateEnsemble fit_ensemble_with_seeds(std::span<const TrainingSample> samples,
                                          std::span<const std::uint64_t> seeds,
                                          const BoostingParams& params, Exec exec = Exec::Parallel);

/// Continues boosting every member on its own bootstrap of `new_samples`
/// only; prior trees are kept unchanged.
SurrogateEnsemble warm_start(const SurrogateEnsemble& ensemble,
                             std::span<const TrainingSample> new_samples, int extra_trees,
                             std::uint64_t seed, Exec exec = Exec::Parallel);

/// Surrogate clamps applied at use sites: accuracy to [0, 100], cost metrics
/// to at least 1e-6.
PerformanceVector clamp_prediction(PerformanceVector p);

/// Coefficient of determination 1 - SS_res / SS_tot. Throws
/// std::invalid_argument when fewer than two targets or zero target variance.
double r2(std::span<const double> predicted, std::span<const double> actual);
double r2(const BoostedModel& model, std::span<const TrainingSample> holdout, Metric target);
/// R^2 of the ensemble mean for each objective.
std::array<double, 4> r2(const SurrogateEnsemble& ensemble, std::span<const TrainingSample> holdout);

// ---------------------------------------------------------------------------
// Model files

class SurrogateFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class SurrogateVersionError : public SurrogateFormatError {
 public:
  using SurrogateFormatError::SurrogateFormatError;
};
class SchemaMismatchError : public SurrogateFormatError {
 public:
  using SurrogateFormatError::SurrogateFormatError;
};

inline constexpr std::uint32_t kSurrogateFormatVersion = 1;

std::string serialize(const SurrogateEnsemble& e);
SurrogateEnsemble deserialize(std::string_view bytes);
void save(const SurrogateEnsemble& e, const std::string& path);
SurrogateEnsemble load(const std::string& path);

}  // namespace effsearch
