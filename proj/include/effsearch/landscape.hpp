// SPDX-License-Identifier: Apache-2.0
//
// Closed-form synthetic performance landscape. Each objective has a linear
// predictor: a base level plus per-axis-value effects plus pairwise
// interaction terms. Accuracy is 100 * logistic(predictor); latency, memory
// and energy are exp(predictor).
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "effsearch/evaluator.hpp"
#include "effsearch/serialization.hpp"

namespace effsearch {

enum class LandscapeProfile : std::uint8_t { Default, MemoryTight, InteractionHeavy };

std::string_view to_string(LandscapeProfile p);
/// Accepts "default", "memory-tight", "interaction-heavy"; throws
/// std::invalid_argument otherwise.
LandscapeProfile parse_landscape_profile(std::string_view s);

/// Contributions to (accuracy logit, log latency, log memory, log energy).
using EffectRow = std::array<double, 4>;

/// Applies when both axis conditions hold. A condition code of kAnyActive
/// matches any non-zero code of an active axis (e.g. any sparse expert count).
struct InteractionTerm {
  static constexpr int kAnyActive = -1;
  std::string name;
  Axis axis_a;
  int code_a;
  Axis axis_b;
  int code_b;
  EffectRow effect{};
};

class SyntheticLandscape final : public Evaluator {
 public:
  static SyntheticLandscape generate(std::uint64_t seed, LandscapeProfile profile,
                                     const ModelDescriptor& model = {},
                                     const TaskDescriptor& task = {});

  /// Noisy measurement; repeat calls on one config agree.
  PerformanceVector evaluate(const EfficiencyConfig& c) const override;
  PerformanceVector evaluate_noiseless(const EfficiencyConfig& c) const;
  std::string identity() const override;

  /// Linear predictors before the squash, the INT4 x sparse penalty and noise.
  EffectRow linear_predictor(const EfficiencyConfig& c) const;

  const EffectRow& base() const { return base_; }
  /// Main effect of one axis value (codes per Axis).
  const EffectRow& effect(Axis a, int code) const;
  const std::vector<InteractionTerm>& interactions() const { return interactions_; }
  double interaction_scale() const { return interaction_scale_; }
  /// Accuracy points subtracted from INT4 + sparse-MoE configurations.
  double int4_sparse_penalty_pp() const { return int4_sparse_penalty_pp_ * interaction_scale_; }
  /// Rank at which the accuracy gain from rank saturates (FP16..INT8).
  int rank_optimum() const { return rank_optimum_; }

  std::uint64_t seed() const { return seed_; }
  LandscapeProfile profile() const { return profile_; }
  const ModelDescriptor& model() const { return model_; }
  const TaskDescriptor& task() const { return task_; }
  double accuracy_noise_pp() const { return noise_acc_pp_; }
  double log_noise_sigma() const { return noise_log_sigma_; }

  /// Copy with the given noise levels (accuracy in points, cost metrics as
  /// log-normal sigma).
  SyntheticLandscape with_noise(double accuracy_pp, double log_sigma) const;
  /// Copy with every interaction term (and the INT4 x sparse rules) removed.
  SyntheticLandscape without_interactions() const;
  /// Copy whose effects on `axis` are perturbed by uniform offsets in
  /// [-magnitude, magnitude], drawn from `seed`.
  SyntheticLandscape shifted(Axis axis, double magnitude, std::uint64_t seed) const;

  /// Landscape definition: seed, profile, base levels and every table.
  Json definition() const;

 private:
  SyntheticLandscape() = default;

  bool matches(const EfficiencyConfig& c, Axis a, int code) const;

  std::uint64_t seed_ = 0;
  LandscapeProfile profile_ = LandscapeProfile::Default;
  ModelDescriptor model_;
  TaskDescriptor task_;
  EffectRow base_{};
  std::array<std::vector<EffectRow>, kAxisCount> effects_;
  std::vector<InteractionTerm> interactions_;
  double interaction_scale_ = 1.0;
  double int4_sparse_penalty_pp_ = 2.0;
  int rank_optimum_ = 32;
  double rank_slope_ = 0.08;
  double noise_acc_pp_ = 0.5;
  double noise_log_sigma_ = 0.05;
  std::string shift_tag_;
};

}  // namespace effsearch
