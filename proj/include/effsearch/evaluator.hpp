// SPDX-License-Identifier: Apache-2.0
//
// True-evaluator contract. An evaluator is bound to one model, task and
// hardware target and must be safe for concurrent evaluate() calls.
#pragma once

#include <atomic>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "effsearch/config_space.hpp"
#include "effsearch/objectives.hpp"

namespace effsearch {

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  /// Throws EvaluationError (or a subclass) when no measurement exists.
  virtual PerformanceVector evaluate(const EfficiencyConfig& c) const = 0;
  /// evaluate() on each config, results by index.
  virtual std::vector<PerformanceVector> evaluate_batch(std::span<const EfficiencyConfig> cs) const {
    std::vector<PerformanceVector> out;
    out.reserve(cs.size());
    for (const auto& c : cs) out.push_back(evaluate(c));
    return out;
  }
  /// Stable identifier recorded in manifests and traces.
  virtual std::string identity() const = 0;
  /// True for surrogate predictions rather than measurements.
  virtual bool is_prediction() const { return false; }
};

/// Forwards to another evaluator and counts calls.
class CountingEvaluator final : public Evaluator {
 public:
  explicit CountingEvaluator(const Evaluator& inner) : inner_(inner) {}

  PerformanceVector evaluate(const EfficiencyConfig& c) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.evaluate(c);
  }
  std::vector<PerformanceVector> evaluate_batch(std::span<const EfficiencyConfig> cs) const override {
    calls_.fetch_add(cs.size(), std::memory_order_relaxed);
    return inner_.evaluate_batch(cs);
  }
  std::string identity() const override { return inner_.identity(); }
  bool is_prediction() const override { return inner_.is_prediction(); }

  std::size_t calls() const { return calls_.load(); }
  void reset() { calls_.store(0); }

 private:
  const Evaluator& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace effsearch
