// SPDX-License-Identifier: Apache-2.0
#include "effsearch/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "effsearch/rng.hpp"

namespace effsearch {

namespace {

constexpr std::size_t kAcc = 0, kLat = 1, kMem = 2, kEnergy = 3;

std::size_t idx(Axis a) { return static_cast<std::size_t>(a); }

std::size_t position(Axis a, int code) {
  const auto d = full_axis_domain(a);
  const auto it = std::find(d.begin(), d.end(), code);
  if (it == d.end()) throw std::invalid_argument("axis code outside the full domain");
  return static_cast<std::size_t>(it - d.begin());
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Accuracy loss (logit) of rank r against saturation rank r_opt.
double rank_shortfall(int r, double r_opt, double slope) {
  return -slope * std::max(0.0, std::log2(r_opt / static_cast<double>(r)));
}

// Main-effect tables: accuracy logit, log latency, log memory, log power.
// Energy = latency effect + power effect.
struct Table {
  Axis axis;
  std::vector<std::array<double, 4>> rows;  // acc, lat, mem, pow
};

std::vector<Table> main_tables() {
  return {
      {Axis::Attention, {{0, 0, 0, 0}, {-0.10, -0.25, -0.08, -0.03}, {-0.03, -0.18, -0.05, -0.02},
                         {0.02, -0.12, -0.06, 0.01}}},
      {Axis::Experts, {{0, 0, 0, 0}, {0.10, 0.06, 0, 0.04}, {0.17, 0.09, 0, 0.06}, {0.20, 0.12, 0, 0.08}}},
      {Axis::TopK, {{0, 0, 0, 0}, {0.04, 0.15, 0.02, 0.05}}},
      {Axis::FtMethod, {{0.06, 0, 0, 0}, {0, 0.03, 0.01, 0}, {-0.05, 0.10, -0.03, 0.02},
                        {0.03, 0.06, 0.02, 0.01}, {0.02, 0.03, 0.01, 0}}},
      {Axis::Rank, {{0, 0, 0, 0}, {0, 0.01, 0.008, 0}, {0, 0.02, 0.016, 0}, {0, 0.03, 0.024, 0},
                    {0, 0.04, 0.032, 0}}},
      {Axis::Alpha, {{-0.03, 0, 0, 0}, {0, 0, 0, 0}, {-0.02, 0, 0, 0}}},
      {Axis::Precision, {{0, 0, 0, 0}, {-0.02, -0.15, -0.45, -0.05}, {-0.05, -0.22, -0.62, -0.08},
                         {-0.35, -0.33, -1.15, -0.12}}},
      {Axis::QuantMethod, {{0, 0, 0, 0}, {0.03, -0.02, -0.01, 0}, {-0.01, -0.04, 0.02, -0.01}}},
      {Axis::KvCache, {{0, 0, 0, 0}, {-0.06, -0.08, -0.20, -0.01}, {-0.02, -0.05, -0.12, -0.01}}},
  };
}

constexpr int kMHA = static_cast<int>(AttentionKind::MHA);
constexpr int kMQA = static_cast<int>(AttentionKind::MQA);
constexpr int kMLA = static_cast<int>(AttentionKind::MLA);
constexpr int kINT8 = 1 + static_cast<int>(Precision::INT8);
constexpr int kINT4 = 1 + static_cast<int>(Precision::INT4);
constexpr int kQLoRA = 1 + static_cast<int>(PeftMethod::QLoRA);
constexpr int kKvMqa = static_cast<int>(KvCacheKind::MqaStyle);

std::vector<InteractionTerm> interaction_terms() {
  constexpr int any = InteractionTerm::kAnyActive;
  return {
      {"int4_x_mqa", Axis::Precision, kINT4, Axis::Attention, kMQA, {-0.10, 0, 0, 0}},
      {"int8_x_mqa", Axis::Precision, kINT8, Axis::Attention, kMQA, {-0.03, 0, 0, 0}},
      {"int4_x_mla", Axis::Precision, kINT4, Axis::Attention, kMLA, {-0.05, 0, 0, 0}},
      {"mla_x_sparse", Axis::Attention, kMLA, Axis::Experts, any, {0.04, -0.03, 0, -0.03}},
      {"mha_x_mqa_kv", Axis::Attention, kMHA, Axis::KvCache, kKvMqa, {-0.04, 0, 0, 0}},
      {"qlora_x_int4", Axis::FtMethod, kQLoRA, Axis::Precision, kINT4, {0.05, 0, 0, 0}},
  };
}

double jitter(double v, Rng& rng) {
  const double f = 1.0 + rng.uniform(-0.25, 0.25);
  return v == 0.0 ? 0.0 : v * f;
}

// Distinct 64-bit key per configuration.
std::uint64_t config_key(const EfficiencyConfig& c) {
  std::uint64_t key = 0;
  for (Axis a : kAxes) {
    const auto v = axis_value(c, a);
    key = key * 257 + static_cast<std::uint64_t>(v ? *v + 1 : 0);
  }
  return key;
}

}  // namespace

std::string_view to_string(LandscapeProfile p) {
  switch (p) {
    case LandscapeProfile::Default: return "default";
    case LandscapeProfile::MemoryTight: return "memory-tight";
    case LandscapeProfile::InteractionHeavy: return "interaction-heavy";
  }
  return "default";
}

LandscapeProfile parse_landscape_profile(std::string_view s) {
  for (auto p : {LandscapeProfile::Default, LandscapeProfile::MemoryTight, LandscapeProfile::InteractionHeavy})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown landscape profile '" + std::string(s) + "'");
}

SyntheticLandscape SyntheticLandscape::generate(std::uint64_t seed, LandscapeProfile profile,
                                                const ModelDescriptor& model, const TaskDescriptor& task) {
  validate(model);
  validate(task);
  SyntheticLandscape l;
  l.seed_ = seed;
  l.profile_ = profile;
  l.model_ = model;
  l.task_ = task;
  Rng rng(derive_seed(seed, 0x1a4d5ca9e));

  const double scale = model.params_billions() / 7.0;
  const double seq = std::log(static_cast<double>(task.sequence_length) / 512.0);
  const double mem_factor = profile == LandscapeProfile::MemoryTight ? 2.5 : 1.0;
  l.base_ = {logit(0.685) + 0.25 * std::log(scale) - 1.2 * (task.difficulty - 0.5),
             std::log(45.2) + 0.8 * std::log(scale) + 0.5 * seq,
             std::log(13.5 * mem_factor) + std::log(scale) + 0.1 * seq,
             std::log(0.85) + 0.9 * std::log(scale) + 0.5 * seq};

  const double p = model.params_billions();
  l.rank_optimum_ = p < 3.0 ? 16 : (p < 30.0 ? 32 : 64);
  l.rank_slope_ = jitter(0.08, rng);
  l.interaction_scale_ = profile == LandscapeProfile::InteractionHeavy ? 3.0 : 1.0;

  for (const auto& t : main_tables()) {
    auto& rows = l.effects_[idx(t.axis)];
    rows.resize(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const double acc = jitter(t.rows[i][0], rng);
      const double lat = jitter(t.rows[i][1], rng);
      const double mem = jitter(t.rows[i][2], rng);
      const double pow = jitter(t.rows[i][3], rng);
      rows[i] = {acc, lat, mem, lat + pow};
    }
  }
  // Memory grows linearly with the expert count.
  const double per_expert = jitter(0.45, rng);
  const auto experts = full_axis_domain(Axis::Experts);
  for (std::size_t i = 0; i < experts.size(); ++i)
    l.effects_[idx(Axis::Experts)][i][kMem] =
        experts[i] == 0 ? 0.0 : std::log(1.0 + per_expert * (experts[i] - 1));
  // Rank gains rise until the saturation rank, then stay flat.
  const auto ranks = full_axis_domain(Axis::Rank);
  for (std::size_t i = 0; i < ranks.size(); ++i)
    l.effects_[idx(Axis::Rank)][i][kAcc] = rank_shortfall(ranks[i], l.rank_optimum_, l.rank_slope_);

  l.interactions_ = interaction_terms();
  for (auto& term : l.interactions_)
    for (auto& v : term.effect) v = jitter(v, rng);
  l.int4_sparse_penalty_pp_ = 2.0;
  return l;
}

bool SyntheticLandscape::matches(const EfficiencyConfig& c, Axis a, int code) const {
  const auto v = axis_value(c, a);
  if (!v) return false;
  return code == InteractionTerm::kAnyActive ? *v != 0 : *v == code;
}

const EffectRow& SyntheticLandscape::effect(Axis a, int code) const {
  return effects_[idx(a)][position(a, code)];
}

EffectRow SyntheticLandscape::linear_predictor(const EfficiencyConfig& c) const {
  EffectRow sum = base_;
  const bool int4_sparse = interaction_scale_ > 0.0 && c.arch.moe.sparse && c.inf.quant.quantized &&
                           c.inf.quant.quantized->precision == Precision::INT4;
  for (Axis a : kAxes) {
    const auto v = axis_value(c, a);
    if (!v) continue;
    const auto& row = effect(a, *v);
    for (std::size_t m = 0; m < 4; ++m) {
      // Routing instability: aggressive quantization cancels the MoE accuracy gain.
      if (m == kAcc && int4_sparse && (a == Axis::Experts || a == Axis::TopK)) continue;
      sum[m] += row[m];
    }
  }
  for (const auto& term : interactions_) {
    if (!matches(c, term.axis_a, term.code_a) || !matches(c, term.axis_b, term.code_b)) continue;
    for (std::size_t m = 0; m < 4; ++m) {
      if (m == kAcc && int4_sparse && (term.axis_a == Axis::Experts || term.axis_b == Axis::Experts))
        continue;
      sum[m] += interaction_scale_ * term.effect[m];
    }
  }
  // Quantization shifts the optimal rank: INT4 saturates at twice the rank.
  if (c.ft.peft && matches(c, Axis::Precision, kINT4)) {
    const int r = c.ft.peft->rank;
    sum[kAcc] += interaction_scale_ * (rank_shortfall(r, 2.0 * rank_optimum_, rank_slope_) -
                                       rank_shortfall(r, rank_optimum_, rank_slope_));
  }
  return sum;
}

PerformanceVector SyntheticLandscape::evaluate_noiseless(const EfficiencyConfig& c) const {
  const EffectRow z = linear_predictor(c);
  double acc = 100.0 * logistic(z[kAcc]);
  if (interaction_scale_ > 0.0 && c.arch.moe.sparse && c.inf.quant.quantized &&
      c.inf.quant.quantized->precision == Precision::INT4)
    acc -= int4_sparse_penalty_pp();
  return PerformanceVector{std::clamp(acc, 0.0, 100.0), std::exp(z[kLat]), std::exp(z[kMem]),
                           std::exp(z[kEnergy])};
}

PerformanceVector SyntheticLandscape::evaluate(const EfficiencyConfig& c) const {
  PerformanceVector p = evaluate_noiseless(c);
  if (noise_acc_pp_ == 0.0 && noise_log_sigma_ == 0.0) return p;
  Rng rng(derive_seed(derive_seed(seed_, 0x0153), config_key(c)));
  p.accuracy_pct = std::clamp(p.accuracy_pct + noise_acc_pp_ * rng.normal(), 0.0, 100.0);
  p.latency_ms *= std::exp(noise_log_sigma_ * rng.normal());
  p.memory_gb *= std::exp(noise_log_sigma_ * rng.normal());
  p.energy_j *= std::exp(noise_log_sigma_ * rng.normal());
  return p;
}

std::string SyntheticLandscape::identity() const {
  std::ostringstream os;
  os << "synthetic:" << to_string(profile_) << ":seed=" << seed_;
  if (interaction_scale_ == 0.0) os << ":no-interactions";
  if (noise_acc_pp_ != 0.5 || noise_log_sigma_ != 0.05)
    os << ":noise=" << noise_acc_pp_ << "/" << noise_log_sigma_;
  os << shift_tag_;
  return os.str();
}

SyntheticLandscape SyntheticLandscape::with_noise(double accuracy_pp, double log_sigma) const {
  if (!(accuracy_pp >= 0.0) || !(log_sigma >= 0.0)) throw std::invalid_argument("noise levels must be >= 0");
  SyntheticLandscape l = *this;
  l.noise_acc_pp_ = accuracy_pp;
  l.noise_log_sigma_ = log_sigma;
  return l;
}

SyntheticLandscape SyntheticLandscape::without_interactions() const {
  SyntheticLandscape l = *this;
  l.interaction_scale_ = 0.0;
  return l;
}

SyntheticLandscape SyntheticLandscape::shifted(Axis axis, double magnitude, std::uint64_t seed) const {
  if (!(magnitude >= 0.0)) throw std::invalid_argument("shift magnitude must be >= 0");
  SyntheticLandscape l = *this;
  Rng rng(seed);
  for (auto& row : l.effects_[idx(axis)])
    for (auto& v : row) v += rng.uniform(-magnitude, magnitude);
  std::ostringstream os;
  os << ":shift=" << axis_name(axis) << "@" << magnitude << "/" << seed;
  l.shift_tag_ += os.str();
  return l;
}

Json SyntheticLandscape::definition() const {
  auto row_json = [](const EffectRow& r) {
    return Json{{"accuracy_logit", r[kAcc]}, {"log_latency", r[kLat]}, {"log_memory", r[kMem]},
                {"log_energy", r[kEnergy]}};
  };
  Json effects = Json::object();
  for (Axis a : kAxes) {
    Json per = Json::object();
    const auto d = full_axis_domain(a);
    for (std::size_t i = 0; i < d.size(); ++i) per[axis_value_label(a, d[i])] = row_json(effects_[idx(a)][i]);
    effects[std::string(axis_name(a))] = per;
  }
  Json terms = Json::array();
  for (const auto& t : interactions_) {
    auto cond = [](Axis a, int code) {
      return Json{{"axis", axis_name(a)},
                  {"value", code == InteractionTerm::kAnyActive ? std::string("any") : axis_value_label(a, code)}};
    };
    terms.push_back({{"name", t.name}, {"when", {cond(t.axis_a, t.code_a), cond(t.axis_b, t.code_b)}},
                     {"effect", row_json(t.effect)}});
  }
  return Json{{"identity", identity()},
              {"seed", seed_},
              {"profile", to_string(profile_)},
              {"model", model_},
              {"task", task_},
              {"base", row_json(base_)},
              {"effects", effects},
              {"interactions", terms},
              {"interaction_scale", interaction_scale_},
              {"int4_sparse_penalty_pp", int4_sparse_penalty_pp()},
              {"rank_optimum", rank_optimum_},
              {"rank_slope", rank_slope_},
              {"noise", {{"accuracy_pp", noise_acc_pp_}, {"log_sigma", noise_log_sigma_}}}};
}

}  // namespace effsearch
