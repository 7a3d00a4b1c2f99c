// SPDX-License-Identifier: Apache-2.0
//
// Surrogate ensemble exposed through the evaluator contract, so search code
// can run on either predictions or true measurements.
#pragma once

#include <map>
#include <mutex>

#include "effsearch/evaluator.hpp"
#include "effsearch/surrogate.hpp"

namespace effsearch {

/// Clamped ensemble-mean predictions for one (model, task) pair, memoized
/// per configuration.
class SurrogatePredictor final : public Evaluator {
 public:
  SurrogatePredictor(const SurrogateEnsemble& ensemble, ModelDescriptor model, TaskDescriptor task,
                     Exec exec = Exec::Serial)
      : ensemble_(ensemble), model_(std::move(model)), task_(std::move(task)), exec_(exec) {}

  PerformanceVector evaluate(const EfficiencyConfig& c) const override;
  std::vector<PerformanceVector> evaluate_batch(std::span<const EfficiencyConfig> cs) const override;
  ObjectivePrediction mean_var(const EfficiencyConfig& c) const {
    return ensemble_.predict_mean_var(encode(c, model_, task_));
  }
  std::string identity() const override { return "surrogate"; }
  bool is_prediction() const override { return true; }

  std::size_t cache_size() const;

 private:
  const SurrogateEnsemble& ensemble_;
  ModelDescriptor model_;
  TaskDescriptor task_;
  Exec exec_;
  mutable std::mutex mu_;
  mutable std::map<EfficiencyConfig, PerformanceVector> cache_;
};

}  // namespace effsearch
