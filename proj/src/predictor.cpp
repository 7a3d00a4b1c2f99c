// SPDX-License-Identifier: Apache-2.0
#include "effsearch/predictor.hpp"

namespace effsearch {

PerformanceVector SurrogatePredictor::evaluate(const EfficiencyConfig& c) const {
  {
    std::lock_guard lock(mu_);
    if (const auto it = cache_.find(c); it != cache_.end()) return it->second;
  }
  const PerformanceVector p = clamp_prediction(ensemble_.predict_mean(encode(c, model_, task_)));
  std::lock_guard lock(mu_);
  cache_.emplace(c, p);
  return p;
}

std::vector<PerformanceVector> SurrogatePredictor::evaluate_batch(std::span<const EfficiencyConfig> cs) const {
  std::vector<PerformanceVector> out(cs.size());
  std::vector<std::size_t> missing;
  std::vector<FeatureVector> features;
  {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (const auto it = cache_.find(cs[i]); it != cache_.end()) {
        out[i] = it->second;
      } else {
        missing.push_back(i);
        features.push_back(encode(cs[i], model_, task_));
      }
    }
  }
  if (missing.empty()) return out;
  const auto mv = ensemble_.predict_mean_var_batch(features, exec_);
  std::lock_guard lock(mu_);
  for (std::size_t k = 0; k < missing.size(); ++k) {
    const auto& m = mv[k];
    const PerformanceVector p = clamp_prediction({m[0].mean, m[1].mean, m[2].mean, m[3].mean});
    out[missing[k]] = p;
    cache_.emplace(cs[missing[k]], p);
  }
  return out;
}

std::size_t SurrogatePredictor::cache_size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

}  // namespace effsearch
