// SPDX-License-Identifier: Apache-2.0
#include "effsearch/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "effsearch/rng.hpp"

namespace effsearch {

void validate(const BoostingParams& p) {
  if (p.n_estimators < 0) throw std::invalid_argument("n_estimators must be >= 0");
  if (p.max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
  if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0))
    throw std::invalid_argument("learning_rate must lie in (0, 1]");
  if (!(p.subsample > 0.0 && p.subsample <= 1.0)) throw std::invalid_argument("subsample must lie in (0, 1]");
  if (!(p.colsample > 0.0 && p.colsample <= 1.0)) throw std::invalid_argument("colsample must lie in (0, 1]");
  if (p.min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
}

std::vector<TrainingSample> make_samples(std::span<const EfficiencyConfig> configs,
                                         std::span<const PerformanceVector> observed,
                                         const ModelDescriptor& model, const TaskDescriptor& task) {
  if (configs.size() != observed.size())
    throw std::invalid_argument("make_samples: configs and observations differ in length");
  std::vector<TrainingSample> out;
  out.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i)
    out.push_back(TrainingSample{encode(configs[i], model, task), observed[i], configs[i]});
  return out;
}

// ---------------------------------------------------------------------------
// Trees

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

double RegressionTree::max_abs_leaf() const {
  double m = 0.0;
  for (const auto& n : nodes_)
    if (n.feature < 0) m = std::max(m, std::abs(n.value));
  return m;
}

double BoostedModel::predict_prefix(const FeatureVector& x, std::size_t tree_count) const {
  double sum = 0.0;
  const std::size_t n = std::min(tree_count, trees_.size());
  for (std::size_t t = 0; t < n; ++t) sum += trees_[t].predict(x);
  return base_ + shrinkage_ * sum;
}

std::vector<double> BoostedModel::predict_batch(std::span<const FeatureVector> xs) const {
  std::vector<double> sum(xs.size(), 0.0);
  for (const auto& tree : trees_)
    for (std::size_t i = 0; i < xs.size(); ++i) sum[i] += tree.predict(xs[i]);
  for (auto& v : sum) v = base_ + shrinkage_ * v;
  return sum;
}

namespace {

// Per-feature sorted distinct values and each row's bin, column-major.
struct BinnedData {
  std::size_t rows = 0;
  std::vector<std::vector<double>> values;
  std::vector<std::uint32_t> bins;

  std::uint32_t bin(std::size_t feature, std::size_t row) const { return bins[feature * rows + row]; }
};

BinnedData bin_features(std::span<const FeatureVector> x) {
  BinnedData d;
  d.rows = x.size();
  d.values.resize(kFeatureCount);
  d.bins.resize(kFeatureCount * x.size());
  std::vector<double> col(x.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t r = 0; r < x.size(); ++r) col[r] = x[r][f];
    auto& vals = d.values[f];
    vals = col;
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t r = 0; r < x.size(); ++r)
      d.bins[f * x.size() + r] = static_cast<std::uint32_t>(
          std::lower_bound(vals.begin(), vals.end(), col[r]) - vals.begin());
  }
  return d;
}

class TreeGrower {
 public:
  TreeGrower(const BinnedData& data, std::span<const double> residual, const BoostingParams& params,
             std::span<const std::size_t> features)
      : data_(data), g_(residual), params_(params), features_(features) {}

  RegressionTree grow(std::vector<std::uint32_t> rows) {
    nodes_.clear();
    rows_ = std::move(rows);
    build(0, rows_.size(), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    std::int32_t feature = -1;
    std::uint32_t last_left_bin = 0;
    double threshold = 0.0;
    double gain = 0.0;
  };

  Split best_split(std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double g = g_[rows_[i]];
      sum += g;
      sum_sq += g * g;
    }
    const double parent = sum * sum / static_cast<double>(n);
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    Split best;
    best.gain = 1e-10 * sum_sq + 1e-300;

    for (std::size_t f : features_) {
      const auto& vals = data_.values[f];
      const std::size_t nb = vals.size();
      if (nb < 2) continue;
      hist_sum_.assign(nb, 0.0);
      hist_cnt_.assign(nb, 0);
      const std::uint32_t* col = &data_.bins[f * data_.rows];
      for (std::size_t i = begin; i < end; ++i) {
        const std::uint32_t r = rows_[i];
        hist_sum_[col[r]] += g_[r];
        ++hist_cnt_[col[r]];
      }
      double left_sum = 0.0;
      std::size_t left_n = 0;
      std::int64_t last = -1;
      for (std::size_t b = 0; b < nb; ++b) {
        if (hist_cnt_[b] == 0) continue;
        if (last >= 0 && left_n >= min_leaf && n - left_n >= min_leaf) {
          const double right_sum = sum - left_sum;
          const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                              right_sum * right_sum / static_cast<double>(n - left_n) - parent;
          if (gain > best.gain) {
            best.feature = static_cast<std::int32_t>(f);
            best.last_left_bin = static_cast<std::uint32_t>(last);
            best.threshold = 0.5 * (vals[static_cast<std::size_t>(last)] + vals[b]);
            best.gain = gain;
          }
        }
        left_sum += hist_sum_[b];
        left_n += hist_cnt_[b];
        last = static_cast<std::int64_t>(b);
      }
    }
    return best;
  }

  std::int32_t build(std::size_t begin, std::size_t end, int depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    const std::size_t n = end - begin;
    Split split;
    if (depth < params_.max_depth && n >= 2 * static_cast<std::size_t>(params_.min_samples_leaf))
      split = best_split(begin, end);
    if (split.feature < 0) {
      double sum = 0.0;
      for (std::size_t i = begin; i < end; ++i) sum += g_[rows_[i]];
      nodes_[static_cast<std::size_t>(id)].value = sum / static_cast<double>(n);
      return id;
    }
    const std::uint32_t* col = &data_.bins[static_cast<std::size_t>(split.feature) * data_.rows];
    const auto mid = std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                           [&](std::uint32_t r) { return col[r] <= split.last_left_bin; });
    const auto mid_index = static_cast<std::size_t>(mid - rows_.begin());
    const std::int32_t left = build(begin, mid_index, depth + 1);
    const std::int32_t right = build(mid_index, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const BinnedData& data_;
  std::span<const double> g_;
  const BoostingParams& params_;
  std::span<const std::size_t> features_;
  std::vector<RegressionTree::Node> nodes_;
  std::vector<std::uint32_t> rows_;
  std::vector<double> hist_sum_;
  std::vector<std::uint32_t> hist_cnt_;
};

// Partial Fisher-Yates: first k entries of a shuffled [0, n), sorted.
template <typename T>
std::vector<T> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<T> idx(n);
  std::iota(idx.begin(), idx.end(), T{0});
  if (k < n) {
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

void boost(BoostedModel& model, std::span<const FeatureVector> x, std::span<const double> y,
           std::vector<double> pred, const BoostingParams& params, int trees, std::uint64_t seed) {
  const std::size_t n = x.size();
  const BinnedData data = bin_features(x);
  Rng rng(seed);
  std::vector<double> residual(n);
  const std::size_t row_k =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));
  const std::size_t col_k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(params.colsample * static_cast<double>(kFeatureCount))));
  for (int t = 0; t < trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
    auto rows = sample_without_replacement<std::uint32_t>(n, row_k, rng);
    const auto features = sample_without_replacement<std::size_t>(kFeatureCount, col_k, rng);
    TreeGrower grower(data, residual, params, features);
    RegressionTree tree = grower.grow(std::move(rows));
    for (std::size_t i = 0; i < n; ++i) pred[i] += model.shrinkage() * tree.predict(x[i]);
    model.append(std::move(tree));
  }
}

void check_training_input(std::span<const FeatureVector> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("feature/target length mismatch");
  if (x.size() < 2) throw std::invalid_argument("boosting needs at least two samples");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite training target");
}

std::vector<double> targets(std::span<const TrainingSample> samples, Metric m) {
  std::vector<double> y(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) y[i] = samples[i].observed.get(m);
  return y;
}

std::vector<FeatureVector> features_of(std::span<const TrainingSample> samples) {
  std::vector<FeatureVector> x(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) x[i] = samples[i].features;
  return x;
}

}  // namespace

BoostedModel fit_boosted(std::span<const FeatureVector> x, std::span<const double> y,
                         const BoostingParams& params, std::uint64_t seed) {
  validate(params);
  check_training_input(x, y);
  const double base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  BoostedModel model(base, params.learning_rate, {});
  boost(model, x, y, std::vector<double>(x.size(), base), params, params.n_estimators, seed);
  return model;
}

BoostedModel fit_boosted(std::span<const TrainingSample> samples, Metric target,
                         const BoostingParams& params, std::uint64_t seed) {
  const auto x = features_of(samples);
  const auto y = targets(samples, target);
  return fit_boosted(x, y, params, seed);
}

void continue_boosting(BoostedModel& model, std::span<const FeatureVector> x,
                       std::span<const double> y, const BoostingParams& params, int extra_trees,
                       std::uint64_t seed) {
  validate(params);
  if (extra_trees <= 0) return;
  check_training_input(x, y);
  std::vector<double> pred(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pred[i] = model.predict(x[i]);
  boost(model, x, y, std::move(pred), params, extra_trees, seed);
}

// ---------------------------------------------------------------------------
// Ensembles

SurrogateEnsemble::SurrogateEnsemble(BoostingParams params,
                                     std::array<std::vector<BoostedModel>, 4> members,
                                     std::uint64_t schema_hash)
    : params_(params), members_(std::move(members)), schema_hash_(schema_hash) {
  for (const auto& m : members_)
    if (m.size() != members_[0].size())
      throw std::invalid_argument("ensemble objectives must have equal member counts");
}

ObjectivePrediction SurrogateEnsemble::predict_mean_var(const FeatureVector& x) const {
  ObjectivePrediction out{};
  const std::size_t e = size();
  if (e == 0) return out;
  std::vector<double> v(e);
  for (std::size_t o = 0; o < 4; ++o) {
    double sum = 0.0;
    for (std::size_t m = 0; m < e; ++m) {
      v[m] = members_[o][m].predict(x);
      sum += v[m];
    }
    const double mean = sum / static_cast<double>(e);
    double ss = 0.0;
    for (double p : v) ss += (p - mean) * (p - mean);
    out[o] = MeanVar{mean, ss / static_cast<double>(e)};
  }
  return out;
}

std::vector<ObjectivePrediction> SurrogateEnsemble::predict_mean_var_batch(std::span<const FeatureVector> xs,
                                                                          Exec exec) const {
  const std::size_t e = size();
  std::vector<ObjectivePrediction> out(xs.size());
  if (e == 0) return out;
  const auto per_model = kernels::map_index<std::vector<double>>(
      4 * e, exec, [&](std::size_t job) { return members_[job / e][job % e].predict_batch(xs); });
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t o = 0; o < 4; ++o) {
      double sum = 0.0;
      for (std::size_t m = 0; m < e; ++m) sum += per_model[o * e + m][i];
      const double mean = sum / static_cast<double>(e);
      double ss = 0.0;
      for (std::size_t m = 0; m < e; ++m) {
        const double p = per_model[o * e + m][i];
        ss += (p - mean) * (p - mean);
      }
      out[i][o] = MeanVar{mean, ss / static_cast<double>(e)};
    }
  }
  return out;
}

PerformanceVector SurrogateEnsemble::predict_mean(const FeatureVector& x) const {
  const auto mv = predict_mean_var(x);
  return PerformanceVector{mv[0].mean, mv[1].mean, mv[2].mean, mv[3].mean};
}

std::uint64_t member_seed(std::uint64_t master_seed, Metric m, std::size_t member) {
  return derive_seed(derive_seed(master_seed, member), static_cast<std::uint64_t>(m));
}

SurrogateEnsemble fit_ensemble_with_seeds(std::span<const TrainingSample> samples,
                                          std::span<const std::uint64_t> seeds,
                                          const BoostingParams& params, Exec exec) {
  validate(params);
  if (seeds.empty()) throw std::invalid_argument("ensemble needs at least one member");
  const auto x = features_of(samples);
  std::array<std::vector<double>, 4> y;
  for (Metric m : kMetrics) {
    y[static_cast<std::size_t>(m)] = targets(samples, m);
    check_training_input(x, y[static_cast<std::size_t>(m)]);
  }
  const std::size_t e = seeds.size();
  const auto models = kernels::map_index<BoostedModel>(4 * e, exec, [&](std::size_t job) {
    const std::size_t o = job / e;
    const std::size_t member = job % e;
    const std::uint64_t seed = derive_seed(seeds[member], o);
    // Bootstrap rows with replacement.
    Rng rng(derive_seed(seed, 1));
    const std::size_t n = x.size();
    std::vector<FeatureVector> bx(n);
    std::vector<double> by(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = rng.uniform_index(n);
      bx[i] = x[r];
      by[i] = y[o][r];
    }
    return fit_boosted(bx, by, params, derive_seed(seed, 2));
  });
  std::array<std::vector<BoostedModel>, 4> members;
  for (std::size_t job = 0; job < models.size(); ++job) members[job / e].push_back(models[job]);
  return SurrogateEnsemble(params, std::move(members));
}

SurrogateEnsemble fit_ensemble(std::span<const TrainingSample> samples, std::size_t ensemble_size,
                               const BoostingParams& params, std::uint64_t master_seed, Exec exec) {
  std::vector<std::uint64_t> seeds(ensemble_size);
  for (std::size_t m = 0; m < ensemble_size; ++m) seeds[m] = derive_seed(master_seed, m);
  return fit_ensemble_with_seeds(samples, seeds, params, exec);
}

SurrogateEnsemble warm_start(const SurrogateEnsemble& ensemble,
                             std::span<const TrainingSample> new_samples, int extra_trees,
                             std::uint64_t seed, Exec exec) {
  if (extra_trees <= 0) return ensemble;
  const auto x = features_of(new_samples);
  const std::size_t e = ensemble.size();
  auto models = kernels::map_index<BoostedModel>(4 * e, exec, [&](std::size_t job) {
    const auto metric = static_cast<Metric>(job / e);
    BoostedModel m = ensemble.members(metric)[job % e];
    const auto y = targets(new_samples, metric);
    const std::uint64_t job_seed = derive_seed(seed, job);
    Rng rng(derive_seed(job_seed, 1));
    const std::size_t n = x.size();
    std::vector<FeatureVector> bx(n);
    std::vector<double> by(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = rng.uniform_index(n);
      bx[i] = x[r];
      by[i] = y[r];
    }
    continue_boosting(m, bx, by, ensemble.params(), extra_trees, derive_seed(job_seed, 2));
    return m;
  });
  std::array<std::vector<BoostedModel>, 4> members;
  for (std::size_t job = 0; job < models.size(); ++job) members[job / e].push_back(std::move(models[job]));
  return SurrogateEnsemble(ensemble.params(), std::move(members), ensemble.schema_hash());
}

PerformanceVector clamp_prediction(PerformanceVector p) {
  constexpr double floor = 1e-6;
  p.accuracy_pct = std::clamp(p.accuracy_pct, 0.0, 100.0);
  p.latency_ms = std::max(p.latency_ms, floor);
  p.memory_gb = std::max(p.memory_gb, floor);
  p.energy_j = std::max(p.energy_j, floor);
  return p;
}

double r2(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("r2: length mismatch");
  if (actual.size() < 2) throw std::invalid_argument("r2 needs at least two targets");
  const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
  }
  if (!(ss_tot > 0.0)) throw std::invalid_argument("r2 undefined for zero target variance");
  return 1.0 - ss_res / ss_tot;
}

double r2(const BoostedModel& model, std::span<const TrainingSample> holdout, Metric target) {
  std::vector<double> pred(holdout.size());
  for (std::size_t i = 0; i < holdout.size(); ++i) pred[i] = model.predict(holdout[i].features);
  return r2(pred, targets(holdout, target));
}

std::array<double, 4> r2(const SurrogateEnsemble& ensemble, std::span<const TrainingSample> holdout) {
  std::array<std::vector<double>, 4> pred;
  for (auto& p : pred) p.resize(holdout.size());
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    const auto mv = ensemble.predict_mean_var(holdout[i].features);
    for (std::size_t o = 0; o < 4; ++o) pred[o][i] = mv[o].mean;
  }
  std::array<double, 4> out{};
  for (Metric m : kMetrics)
    out[static_cast<std::size_t>(m)] = r2(pred[static_cast<std::size_t>(m)], targets(holdout, m));
  return out;
}

// ---------------------------------------------------------------------------
// Binary model files (host byte order, IEEE-754 doubles)

namespace {

constexpr char kMagic[8] = {'E', 'F', 'S', 'U', 'R', 'R', '\0', '\0'};

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}
  template <typename T>
  T get() {
    if (in_.size() < sizeof(T)) throw SurrogateFormatError("surrogate file truncated");
    T v;
    std::memcpy(&v, in_.data(), sizeof(T));
    in_.remove_prefix(sizeof(T));
    return v;
  }
  std::string_view raw(std::size_t n) {
    if (in_.size() < n) throw SurrogateFormatError("surrogate file truncated");
    auto v = in_.substr(0, n);
    in_.remove_prefix(n);
    return v;
  }
  bool done() const { return in_.empty(); }

 private:
  std::string_view in_;
};

}  // namespace

std::string serialize(const SurrogateEnsemble& e) {
  ByteWriter w;
  w.raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kSurrogateFormatVersion);
  w.put<std::uint64_t>(e.schema_hash());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(kFeatureCount));
  const auto& p = e.params();
  w.put<std::int32_t>(p.n_estimators);
  w.put<std::int32_t>(p.max_depth);
  w.put<double>(p.learning_rate);
  w.put<double>(p.subsample);
  w.put<double>(p.colsample);
  w.put<std::int32_t>(p.min_samples_leaf);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(e.size()));
  for (Metric m : kMetrics) {
    for (const auto& model : e.members(m)) {
      w.put<double>(model.base_prediction());
      w.put<double>(model.shrinkage());
      w.put<std::uint32_t>(static_cast<std::uint32_t>(model.trees().size()));
      for (const auto& tree : model.trees()) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(tree.nodes().size()));
        for (const auto& n : tree.nodes()) {
          w.put<std::int32_t>(n.feature);
          w.put<double>(n.threshold);
          w.put<std::int32_t>(n.left);
          w.put<std::int32_t>(n.right);
          w.put<double>(n.value);
        }
      }
    }
  }
  return w.take();
}

SurrogateEnsemble deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.raw(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic)))
    throw SurrogateFormatError("not a surrogate model file");
  const auto version = r.get<std::uint32_t>();
  if (version != kSurrogateFormatVersion)
    throw SurrogateVersionError("surrogate file version " + std::to_string(version) +
                                " unsupported (expected " + std::to_string(kSurrogateFormatVersion) + ")");
  const auto schema = r.get<std::uint64_t>();
  const auto width = r.get<std::uint32_t>();
  if (schema != feature_schema_hash() || width != kFeatureCount)
    throw SchemaMismatchError("surrogate feature schema does not match this build");
  BoostingParams p;
  p.n_estimators = r.get<std::int32_t>();
  p.max_depth = r.get<std::int32_t>();
  p.learning_rate = r.get<double>();
  p.subsample = r.get<double>();
  p.colsample = r.get<double>();
  p.min_samples_leaf = r.get<std::int32_t>();
  const auto e = r.get<std::uint32_t>();
  std::array<std::vector<BoostedModel>, 4> members;
  for (auto& per_metric : members) {
    for (std::uint32_t i = 0; i < e; ++i) {
      const double base = r.get<double>();
      const double shrinkage = r.get<double>();
      const auto trees = r.get<std::uint32_t>();
      std::vector<RegressionTree> ts;
      ts.reserve(trees);
      for (std::uint32_t t = 0; t < trees; ++t) {
        const auto count = r.get<std::uint32_t>();
        std::vector<RegressionTree::Node> nodes(count);
        for (auto& n : nodes) {
          n.feature = r.get<std::int32_t>();
          n.threshold = r.get<double>();
          n.left = r.get<std::int32_t>();
          n.right = r.get<std::int32_t>();
          n.value = r.get<double>();
          const auto limit = static_cast<std::int32_t>(count);
          if (n.feature >= static_cast<std::int32_t>(kFeatureCount) ||
              (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= limit || n.right >= limit)))
            throw SurrogateFormatError("corrupt tree node");
        }
        if (nodes.empty()) throw SurrogateFormatError("empty tree");
        ts.emplace_back(std::move(nodes));
      }
      per_metric.emplace_back(base, shrinkage, std::move(ts));
    }
  }
  if (!r.done()) throw SurrogateFormatError("trailing bytes in surrogate file");
  return SurrogateEnsemble(p, std::move(members), schema);
}

void save(const SurrogateEnsemble& e, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto bytes = serialize(e);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

SurrogateEnsemble load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace effsearch
