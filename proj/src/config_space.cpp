// SPDX-License-Identifier: Apache-2.0
#include "effsearch/config_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace effsearch {

namespace {

constexpr std::array<int, 4> kAttentionDomain = {0, 1, 2, 3};
constexpr std::array<int, 4> kExpertsDomain = {0, 2, 4, 8};
constexpr std::array<int, 2> kTopKDomain = {1, 2};
constexpr std::array<int, 5> kFtMethodDomain = {0, 1, 2, 3, 4};
constexpr std::array<int, 5> kRankDomain = {8, 16, 32, 64, 128};
constexpr std::array<int, 3> kAlphaDomain = {1, 2, 4};
constexpr std::array<int, 4> kPrecisionDomain = {0, 1, 2, 3};
constexpr std::array<int, 3> kQuantMethodDomain = {0, 1, 2};
constexpr std::array<int, 3> kKvDomain = {0, 1, 2};

std::size_t idx(Axis a) { return static_cast<std::size_t>(a); }

std::size_t position(std::span<const int> values, int v) {
  return static_cast<std::size_t>(std::find(values.begin(), values.end(), v) - values.begin());
}

std::array<std::vector<int>, kAxisCount> full_domains() {
  std::array<std::vector<int>, kAxisCount> out;
  for (Axis a : kAxes) {
    auto d = full_axis_domain(a);
    out[idx(a)].assign(d.begin(), d.end());
  }
  return out;
}

// Codes of the variant-active values of an axis (everything except 0).
std::vector<int> nonzero(std::span<const int> v) {
  std::vector<int> out;
  for (int e : v)
    if (e != 0) out.push_back(e);
  return out;
}

}  // namespace

std::string_view to_string(AttentionKind k) {
  static constexpr std::array<std::string_view, 4> names = {"MHA", "MQA", "GQA", "MLA"};
  return names[static_cast<std::size_t>(k)];
}
std::string_view to_string(PeftMethod m) {
  static constexpr std::array<std::string_view, 4> names = {"LoRA", "QLoRA", "DoRA", "RSLoRA"};
  return names[static_cast<std::size_t>(m)];
}
std::string_view to_string(Precision p) {
  static constexpr std::array<std::string_view, 3> names = {"FP8", "INT8", "INT4"};
  return names[static_cast<std::size_t>(p)];
}
std::string_view to_string(QuantMethod m) {
  static constexpr std::array<std::string_view, 3> names = {"GPTQ", "AWQ", "SmoothQuant"};
  return names[static_cast<std::size_t>(m)];
}
std::string_view to_string(KvCacheKind k) {
  static constexpr std::array<std::string_view, 3> names = {"Full", "MQA", "GQA"};
  return names[static_cast<std::size_t>(k)];
}

Stage stage_of(Axis a) {
  switch (a) {
    case Axis::Attention:
    case Axis::Experts:
    case Axis::TopK: return Stage::Arch;
    case Axis::FtMethod:
    case Axis::Rank:
    case Axis::Alpha: return Stage::FineTune;
    default: return Stage::Inference;
  }
}

std::string_view axis_name(Axis a) {
  static constexpr std::array<std::string_view, kAxisCount> names = {
      "attention", "experts", "top_k", "ft_method", "rank", "alpha", "precision", "quant_method",
      "kv_cache"};
  return names[idx(a)];
}

std::optional<Axis> parse_axis(std::string_view name) {
  for (Axis a : kAxes)
    if (axis_name(a) == name) return a;
  return std::nullopt;
}

std::string axis_value_label(Axis a, int code) {
  switch (a) {
    case Axis::Attention: return std::string(to_string(static_cast<AttentionKind>(code)));
    case Axis::Experts: return code == 0 ? "dense" : "e=" + std::to_string(code);
    case Axis::TopK: return "k=" + std::to_string(code);
    case Axis::FtMethod:
      return code == 0 ? "Full" : std::string(to_string(static_cast<PeftMethod>(code - 1)));
    case Axis::Rank: return "r=" + std::to_string(code);
    case Axis::Alpha: return code == 1 ? "a=r" : "a=" + std::to_string(code) + "r";
    case Axis::Precision:
      return code == 0 ? "FP16" : std::string(to_string(static_cast<Precision>(code - 1)));
    case Axis::QuantMethod: return std::string(to_string(static_cast<QuantMethod>(code)));
    case Axis::KvCache: return std::string(to_string(static_cast<KvCacheKind>(code)));
  }
  return {};
}

std::span<const int> full_axis_domain(Axis a) {
  switch (a) {
    case Axis::Attention: return kAttentionDomain;
    case Axis::Experts: return kExpertsDomain;
    case Axis::TopK: return kTopKDomain;
    case Axis::FtMethod: return kFtMethodDomain;
    case Axis::Rank: return kRankDomain;
    case Axis::Alpha: return kAlphaDomain;
    case Axis::Precision: return kPrecisionDomain;
    case Axis::QuantMethod: return kQuantMethodDomain;
    case Axis::KvCache: return kKvDomain;
  }
  return {};
}

std::optional<int> axis_value(const EfficiencyConfig& c, Axis a) {
  switch (a) {
    case Axis::Attention: return static_cast<int>(c.arch.attention);
    case Axis::Experts: return c.arch.moe.sparse ? c.arch.moe.sparse->num_experts : 0;
    case Axis::TopK:
      if (!c.arch.moe.sparse) return std::nullopt;
      return c.arch.moe.sparse->routing_top_k;
    case Axis::FtMethod: return c.ft.peft ? 1 + static_cast<int>(c.ft.peft->method) : 0;
    case Axis::Rank:
      if (!c.ft.peft) return std::nullopt;
      return c.ft.peft->rank;
    case Axis::Alpha:
      if (!c.ft.peft) return std::nullopt;
      return c.ft.peft->alpha_multiplier;
    case Axis::Precision:
      return c.inf.quant.quantized ? 1 + static_cast<int>(c.inf.quant.quantized->precision) : 0;
    case Axis::QuantMethod:
      if (!c.inf.quant.quantized) return std::nullopt;
      return static_cast<int>(c.inf.quant.quantized->method);
    case Axis::KvCache: return static_cast<int>(c.inf.kv_cache);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ConfigSpace

ConfigSpace::ConfigSpace(std::string name, std::array<std::vector<int>, kAxisCount> allowed)
    : name_(std::move(name)), allowed_(std::move(allowed)) {
  for (Axis a : kAxes) {
    auto& v = allowed_[idx(a)];
    if (v.empty())
      throw std::invalid_argument("config space '" + name_ + "': axis " +
                                  std::string(axis_name(a)) + " is empty");
    auto full = full_axis_domain(a);
    for (int code : v) {
      if (std::find(full.begin(), full.end(), code) == full.end())
        throw std::invalid_argument("config space '" + name_ + "': value " +
                                    std::to_string(code) + " not in axis " +
                                    std::string(axis_name(a)));
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

ConfigSpace ConfigSpace::full() { return ConfigSpace("full", full_domains()); }

ConfigSpace ConfigSpace::singleton() {
  std::array<std::vector<int>, kAxisCount> a;
  a[idx(Axis::Attention)] = {0};
  a[idx(Axis::Experts)] = {0};
  a[idx(Axis::TopK)] = {1};
  a[idx(Axis::FtMethod)] = {0};
  a[idx(Axis::Rank)] = {8};
  a[idx(Axis::Alpha)] = {1};
  a[idx(Axis::Precision)] = {0};
  a[idx(Axis::QuantMethod)] = {0};
  a[idx(Axis::KvCache)] = {0};
  return ConfigSpace("singleton", std::move(a));
}

std::vector<std::string> ConfigSpace::preset_names() {
  return {"full", "singleton", "dense", "peft-only", "quantized"};
}

ConfigSpace ConfigSpace::named(std::string_view name) {
  if (name == "full") return full();
  if (name == "singleton") return singleton();
  auto d = full_domains();
  if (name == "dense") {
    d[idx(Axis::Experts)] = {0};
    return ConfigSpace("dense", std::move(d));
  }
  if (name == "peft-only") {
    d[idx(Axis::FtMethod)] = {1, 2, 3, 4};
    return ConfigSpace("peft-only", std::move(d));
  }
  if (name == "quantized") {
    d[idx(Axis::Precision)] = {1, 2, 3};
    return ConfigSpace("quantized", std::move(d));
  }
  throw std::invalid_argument("unknown config space: " + std::string(name));
}

bool ConfigSpace::allows(Axis a, int code) const {
  auto v = allowed(a);
  return std::binary_search(v.begin(), v.end(), code);
}

bool ConfigSpace::allows_dense() const { return allows(Axis::Experts, 0); }
bool ConfigSpace::allows_sparse() const { return allowed(Axis::Experts).back() != 0; }
bool ConfigSpace::allows_full_ft() const { return allows(Axis::FtMethod, 0); }
bool ConfigSpace::allows_peft() const { return allowed(Axis::FtMethod).back() != 0; }
bool ConfigSpace::allows_fp16() const { return allows(Axis::Precision, 0); }
bool ConfigSpace::allows_quantized() const { return allowed(Axis::Precision).back() != 0; }

std::size_t ConfigSpace::arch_count() const {
  const std::size_t moe = (allows_dense() ? 1 : 0) +
                          nonzero(allowed(Axis::Experts)).size() * allowed(Axis::TopK).size();
  return allowed(Axis::Attention).size() * moe;
}

std::size_t ConfigSpace::ft_count() const {
  return (allows_full_ft() ? 1 : 0) + nonzero(allowed(Axis::FtMethod)).size() *
                                          allowed(Axis::Rank).size() * allowed(Axis::Alpha).size();
}

std::size_t ConfigSpace::inf_count() const {
  const std::size_t quant = (allows_fp16() ? 1 : 0) + nonzero(allowed(Axis::Precision)).size() *
                                                          allowed(Axis::QuantMethod).size();
  return quant * allowed(Axis::KvCache).size();
}

std::vector<ArchConfig> ConfigSpace::arch_configs() const {
  std::vector<ArchConfig> out;
  for (int att : allowed(Axis::Attention)) {
    ArchConfig a;
    a.attention = static_cast<AttentionKind>(att);
    if (allows_dense()) out.push_back(a);
    for (int e : nonzero(allowed(Axis::Experts))) {
      for (int k : allowed(Axis::TopK)) {
        a.moe.sparse = SparseMoE{e, k};
        out.push_back(a);
      }
    }
  }
  return out;
}

std::vector<FineTuneConfig> ConfigSpace::ft_configs() const {
  std::vector<FineTuneConfig> out;
  if (allows_full_ft()) out.push_back(FineTuneConfig{});
  for (int m : nonzero(allowed(Axis::FtMethod)))
    for (int r : allowed(Axis::Rank))
      for (int am : allowed(Axis::Alpha))
        out.push_back(FineTuneConfig{PeftConfig{static_cast<PeftMethod>(m - 1), r, am}});
  return out;
}

std::vector<InferenceConfig> ConfigSpace::inf_configs() const {
  std::vector<QuantSetting> quants;
  if (allows_fp16()) quants.push_back(QuantSetting{});
  for (int p : nonzero(allowed(Axis::Precision)))
    for (int m : allowed(Axis::QuantMethod))
      quants.push_back(
          QuantSetting{Quantization{static_cast<Precision>(p - 1), static_cast<QuantMethod>(m)}});
  std::vector<InferenceConfig> out;
  for (const auto& q : quants)
    for (int kv : allowed(Axis::KvCache)) out.push_back(InferenceConfig{q, static_cast<KvCacheKind>(kv)});
  return out;
}

EfficiencyConfig ConfigSpace::first() const { return config_at(*this, 0); }

std::vector<EfficiencyConfig> enumerate(const ConfigSpace& space) {
  const auto archs = space.arch_configs();
  const auto fts = space.ft_configs();
  const auto infs = space.inf_configs();
  std::vector<EfficiencyConfig> out;
  out.reserve(archs.size() * fts.size() * infs.size());
  for (const auto& a : archs)
    for (const auto& f : fts)
      for (const auto& i : infs) out.push_back(EfficiencyConfig{a, f, i});
  return out;
}

bool validate(const EfficiencyConfig& c, const ConfigSpace& space) {
  if (!space.allows(Axis::Attention, static_cast<int>(c.arch.attention))) return false;
  if (c.arch.moe.sparse) {
    const auto& s = *c.arch.moe.sparse;
    if (s.num_experts == 0 || !space.allows(Axis::Experts, s.num_experts)) return false;
    if (!space.allows(Axis::TopK, s.routing_top_k)) return false;
  } else if (!space.allows_dense()) {
    return false;
  }
  if (c.ft.peft) {
    const auto& p = *c.ft.peft;
    const int m = static_cast<int>(p.method);
    if (m < 0 || m > 3 || !space.allows(Axis::FtMethod, 1 + m)) return false;
    if (!space.allows(Axis::Rank, p.rank) || !space.allows(Axis::Alpha, p.alpha_multiplier))
      return false;
  } else if (!space.allows_full_ft()) {
    return false;
  }
  if (c.inf.quant.quantized) {
    const auto& q = *c.inf.quant.quantized;
    const int p = static_cast<int>(q.precision);
    if (p < 0 || p > 2 || !space.allows(Axis::Precision, 1 + p)) return false;
    if (!space.allows(Axis::QuantMethod, static_cast<int>(q.method))) return false;
  } else if (!space.allows_fp16()) {
    return false;
  }
  return space.allows(Axis::KvCache, static_cast<int>(c.inf.kv_cache));
}

std::size_t ordinal(const EfficiencyConfig& c, const ConfigSpace& space) {
  // arch index
  const auto experts = nonzero(space.allowed(Axis::Experts));
  const std::size_t dense = space.allows_dense() ? 1 : 0;
  const std::size_t per_att = dense + experts.size() * space.allowed(Axis::TopK).size();
  std::size_t arch = position(space.allowed(Axis::Attention), static_cast<int>(c.arch.attention)) * per_att;
  if (c.arch.moe.sparse) {
    arch += dense + position(experts, c.arch.moe.sparse->num_experts) * space.allowed(Axis::TopK).size() +
            position(space.allowed(Axis::TopK), c.arch.moe.sparse->routing_top_k);
  }
  // fine-tuning index
  std::size_t ft = 0;
  if (c.ft.peft) {
    const auto methods = nonzero(space.allowed(Axis::FtMethod));
    const std::size_t per_method = space.allowed(Axis::Rank).size() * space.allowed(Axis::Alpha).size();
    ft = (space.allows_full_ft() ? 1 : 0) +
         position(methods, 1 + static_cast<int>(c.ft.peft->method)) * per_method +
         position(space.allowed(Axis::Rank), c.ft.peft->rank) * space.allowed(Axis::Alpha).size() +
         position(space.allowed(Axis::Alpha), c.ft.peft->alpha_multiplier);
  }
  // inference index
  std::size_t quant = 0;
  if (c.inf.quant.quantized) {
    const auto precisions = nonzero(space.allowed(Axis::Precision));
    quant = (space.allows_fp16() ? 1 : 0) +
            position(precisions, 1 + static_cast<int>(c.inf.quant.quantized->precision)) *
                space.allowed(Axis::QuantMethod).size() +
            position(space.allowed(Axis::QuantMethod), static_cast<int>(c.inf.quant.quantized->method));
  }
  const std::size_t inf = quant * space.allowed(Axis::KvCache).size() +
                          position(space.allowed(Axis::KvCache), static_cast<int>(c.inf.kv_cache));
  return (arch * space.ft_count() + ft) * space.inf_count() + inf;
}

EfficiencyConfig config_at(const ConfigSpace& space, std::size_t index) {
  const std::size_t n_inf = space.inf_count();
  const std::size_t n_ft = space.ft_count();
  std::size_t inf = index % n_inf;
  index /= n_inf;
  std::size_t ft = index % n_ft;
  std::size_t arch = index / n_ft;

  EfficiencyConfig c;
  {
    const auto experts = nonzero(space.allowed(Axis::Experts));
    const auto topk = space.allowed(Axis::TopK);
    const std::size_t dense = space.allows_dense() ? 1 : 0;
    const std::size_t per_att = dense + experts.size() * topk.size();
    c.arch.attention = static_cast<AttentionKind>(space.allowed(Axis::Attention)[arch / per_att]);
    std::size_t moe = arch % per_att;
    if (moe >= dense) {
      moe -= dense;
      c.arch.moe.sparse = SparseMoE{experts[moe / topk.size()], topk[moe % topk.size()]};
    }
  }
  {
    const std::size_t full = space.allows_full_ft() ? 1 : 0;
    if (ft >= full) {
      ft -= full;
      const auto methods = nonzero(space.allowed(Axis::FtMethod));
      const auto ranks = space.allowed(Axis::Rank);
      const auto alphas = space.allowed(Axis::Alpha);
      const std::size_t per_method = ranks.size() * alphas.size();
      PeftConfig p;
      p.method = static_cast<PeftMethod>(methods[ft / per_method] - 1);
      ft %= per_method;
      p.rank = ranks[ft / alphas.size()];
      p.alpha_multiplier = alphas[ft % alphas.size()];
      c.ft.peft = p;
    }
  }
  {
    const auto kvs = space.allowed(Axis::KvCache);
    c.inf.kv_cache = static_cast<KvCacheKind>(kvs[inf % kvs.size()]);
    std::size_t quant = inf / kvs.size();
    const std::size_t fp16 = space.allows_fp16() ? 1 : 0;
    if (quant >= fp16) {
      quant -= fp16;
      const auto precisions = nonzero(space.allowed(Axis::Precision));
      const auto methods = space.allowed(Axis::QuantMethod);
      c.inf.quant.quantized = Quantization{static_cast<Precision>(precisions[quant / methods.size()] - 1),
                                           static_cast<QuantMethod>(methods[quant % methods.size()])};
    }
  }
  return c;
}

EfficiencyConfig sample_uniform(const ConfigSpace& space, Rng& rng) {
  return config_at(space, rng.uniform_index(space.size()));
}

// ---------------------------------------------------------------------------
// Axis edits and mutation

namespace {

// Sets a field without touching variant activation. Caller guarantees the
// variant is already active where needed.
void set_field(EfficiencyConfig& c, Axis a, int code) {
  switch (a) {
    case Axis::Attention: c.arch.attention = static_cast<AttentionKind>(code); break;
    case Axis::Experts: c.arch.moe.sparse->num_experts = code; break;
    case Axis::TopK: c.arch.moe.sparse->routing_top_k = code; break;
    case Axis::FtMethod: c.ft.peft->method = static_cast<PeftMethod>(code - 1); break;
    case Axis::Rank: c.ft.peft->rank = code; break;
    case Axis::Alpha: c.ft.peft->alpha_multiplier = code; break;
    case Axis::Precision: c.inf.quant.quantized->precision = static_cast<Precision>(code - 1); break;
    case Axis::QuantMethod: c.inf.quant.quantized->method = static_cast<QuantMethod>(code); break;
    case Axis::KvCache: c.inf.kv_cache = static_cast<KvCacheKind>(code); break;
  }
}

using Picker = int (*)(std::span<const int>, Rng*);

int pick_first(std::span<const int> v, Rng*) { return v.front(); }
int pick_uniform(std::span<const int> v, Rng* rng) { return v[rng->uniform_index(v.size())]; }

// Moves axis `a` to `code`, activating or deactivating the owning variant.
// Newly active sub-fields are filled by `pick`. Returns false when the
// variant cannot be activated in `space`.
bool apply_axis(EfficiencyConfig& c, Axis a, int code, const ConfigSpace& space, Picker pick, Rng* rng) {
  switch (a) {
    case Axis::Experts:
      if (code == 0) {
        c.arch.moe.sparse.reset();
      } else if (c.arch.moe.sparse) {
        c.arch.moe.sparse->num_experts = code;
      } else {
        c.arch.moe.sparse = SparseMoE{code, pick(space.allowed(Axis::TopK), rng)};
      }
      return true;
    case Axis::TopK:
      if (!c.arch.moe.sparse) {
        const auto experts = nonzero(space.allowed(Axis::Experts));
        if (experts.empty()) return false;
        c.arch.moe.sparse = SparseMoE{pick(experts, rng), code};
      } else {
        c.arch.moe.sparse->routing_top_k = code;
      }
      return true;
    case Axis::FtMethod:
      if (code == 0) {
        c.ft.peft.reset();
      } else if (c.ft.peft) {
        c.ft.peft->method = static_cast<PeftMethod>(code - 1);
      } else {
        const int r = pick(space.allowed(Axis::Rank), rng);
        const int am = pick(space.allowed(Axis::Alpha), rng);
        c.ft.peft = PeftConfig{static_cast<PeftMethod>(code - 1), r, am};
      }
      return true;
    case Axis::Rank:
    case Axis::Alpha:
      if (!c.ft.peft) {
        const auto methods = nonzero(space.allowed(Axis::FtMethod));
        if (methods.empty()) return false;
        const int m = pick(methods, rng);
        const int r = pick(space.allowed(Axis::Rank), rng);
        const int am = pick(space.allowed(Axis::Alpha), rng);
        c.ft.peft = PeftConfig{static_cast<PeftMethod>(m - 1), r, am};
      }
      set_field(c, a, code);
      return true;
    case Axis::Precision:
      if (code == 0) {
        c.inf.quant.quantized.reset();
      } else if (c.inf.quant.quantized) {
        c.inf.quant.quantized->precision = static_cast<Precision>(code - 1);
      } else {
        c.inf.quant.quantized = Quantization{static_cast<Precision>(code - 1),
                                             static_cast<QuantMethod>(pick(space.allowed(Axis::QuantMethod), rng))};
      }
      return true;
    case Axis::QuantMethod:
      if (!c.inf.quant.quantized) {
        const auto precisions = nonzero(space.allowed(Axis::Precision));
        if (precisions.empty()) return false;
        c.inf.quant.quantized = Quantization{static_cast<Precision>(pick(precisions, rng) - 1),
                                             static_cast<QuantMethod>(code)};
      } else {
        c.inf.quant.quantized->method = static_cast<QuantMethod>(code);
      }
      return true;
    default:
      set_field(c, a, code);
      return true;
  }
}

constexpr std::array<std::array<Axis, 3>, 3> kStageAxes = {{
    {Axis::Attention, Axis::Experts, Axis::TopK},
    {Axis::FtMethod, Axis::Rank, Axis::Alpha},
    {Axis::Precision, Axis::QuantMethod, Axis::KvCache},
}};

}  // namespace

std::optional<EfficiencyConfig> with_axis_value(const EfficiencyConfig& c, Axis a, int code,
                                                const ConfigSpace& space) {
  if (!space.allows(a, code)) return std::nullopt;
  EfficiencyConfig out = c;
  if (!apply_axis(out, a, code, space, pick_first, nullptr)) return std::nullopt;
  return out;
}

EfficiencyConfig mutate_field(const EfficiencyConfig& c, Stage stage, const ConfigSpace& space,
                              Rng& rng) {
  // Active fields of the stage that have at least one alternative value.
  std::array<Axis, 3> candidates{};
  std::size_t n = 0;
  for (Axis a : kStageAxes[static_cast<std::size_t>(stage)]) {
    auto current = axis_value(c, a);
    if (!current) continue;
    if (space.allowed(a).size() >= 2) candidates[n++] = a;
  }
  if (n == 0) return c;
  const Axis field = candidates[rng.uniform_index(n)];
  const int current = *axis_value(c, field);
  std::vector<int> alternatives;
  for (int v : space.allowed(field))
    if (v != current) alternatives.push_back(v);
  const int code = alternatives[rng.uniform_index(alternatives.size())];
  EfficiencyConfig out = c;
  apply_axis(out, field, code, space, pick_uniform, &rng);
  return out;
}

// ---------------------------------------------------------------------------
// Encoding

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "att_mha",        "att_mqa",       "att_gqa",        "att_mla",        "moe_active",
      "log2_experts",   "top_k",         "ft_full",        "ft_lora",        "ft_qlora",
      "ft_dora",        "ft_rslora",     "log2_rank",      "alpha_mult",     "bit_width",
      "fp8",            "qm_none",       "qm_gptq",        "qm_awq",         "qm_smoothquant",
      "kv_full",        "kv_mqa",        "kv_gqa",         "log10_params",   "fam_llama",
      "fam_mistral",    "fam_qwen",      "fam_phi",        "fam_gemma",      "fam_other",
      "task_lu",        "task_gen",      "task_longctx",   "task_multiturn", "task_difficulty",
      "log2_seq_len"};
  return names;
}

std::uint64_t feature_schema_hash() {
  std::string joined;
  for (auto n : feature_names()) {
    joined += n;
    joined += ';';
  }
  return fnv1a(joined);
}

FeatureVector encode(const EfficiencyConfig& c, const ModelDescriptor& model,
                     const TaskDescriptor& task) {
  FeatureVector f{};
  f[static_cast<std::size_t>(c.arch.attention)] = 1.0;
  if (c.arch.moe.sparse) {
    f[4] = 1.0;
    f[5] = std::log2(static_cast<double>(c.arch.moe.sparse->num_experts));
    f[6] = c.arch.moe.sparse->routing_top_k;
  }
  if (c.ft.peft) {
    f[8 + static_cast<std::size_t>(c.ft.peft->method)] = 1.0;
    f[12] = std::log2(static_cast<double>(c.ft.peft->rank));
    f[13] = c.ft.peft->alpha_multiplier;
  } else {
    f[7] = 1.0;
  }
  if (c.inf.quant.quantized) {
    const auto& q = *c.inf.quant.quantized;
    f[14] = q.precision == Precision::INT4 ? 4.0 : 8.0;
    f[15] = q.precision == Precision::FP8 ? 1.0 : 0.0;
    f[17 + static_cast<std::size_t>(q.method)] = 1.0;
  } else {
    f[14] = 16.0;
    f[16] = 1.0;
  }
  f[20 + static_cast<std::size_t>(c.inf.kv_cache)] = 1.0;

  std::size_t i = kConfigFeatureCount;
  f[i++] = std::log10(model.param_count);
  f[i + model.family_slot()] = 1.0;
  i += kModelFamilies.size();
  f[i + static_cast<std::size_t>(task.domain)] = 1.0;
  i += kTaskDomainCount;
  f[i++] = task.difficulty;
  f[i++] = std::log2(static_cast<double>(task.sequence_length));
  return f;
}

// ---------------------------------------------------------------------------
// Canonical text

std::string to_canonical(const EfficiencyConfig& c) {
  std::string s = "arch=";
  s += to_string(c.arch.attention);
  if (c.arch.moe.sparse) {
    s += "+moe(sparse,e=" + std::to_string(c.arch.moe.sparse->num_experts) +
         ",k=" + std::to_string(c.arch.moe.sparse->routing_top_k) + ")";
  } else {
    s += "+moe(dense)";
  }
  s += "|ft=";
  if (c.ft.peft) {
    s += to_string(c.ft.peft->method);
    s += "(r=" + std::to_string(c.ft.peft->rank) + "," +
         axis_value_label(Axis::Alpha, c.ft.peft->alpha_multiplier) + ")";
  } else {
    s += "Full";
  }
  s += "|inf=";
  if (c.inf.quant.quantized) {
    s += to_string(c.inf.quant.quantized->precision);
    s += "/";
    s += to_string(c.inf.quant.quantized->method);
  } else {
    s += "FP16";
  }
  s += "+kv=";
  s += to_string(c.inf.kv_cache);
  return s;
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view token, std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (to_string(static_cast<E>(i)) == token) return static_cast<E>(i);
  }
  throw ConfigParseError("unknown " + std::string(what) + " '" + std::string(token) + "'");
}

bool consume(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

int parse_int(std::string_view& s) {
  std::size_t n = 0;
  while (n < s.size() && n < 4 && s[n] >= '0' && s[n] <= '9') ++n;
  if (n == 0) throw ConfigParseError("expected integer");
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) v = v * 10 + (s[i] - '0');
  s.remove_prefix(n);
  return v;
}

std::string_view take_until(std::string_view& s, std::string_view delims) {
  const auto pos = s.find_first_of(delims);
  std::string_view head = s.substr(0, pos);
  s.remove_prefix(pos == std::string_view::npos ? s.size() : pos);
  return head;
}

}  // namespace

EfficiencyConfig parse_canonical(std::string_view text) {
  std::string_view s = text;
  EfficiencyConfig c;
  if (!consume(s, "arch=")) throw ConfigParseError("expected 'arch='");
  c.arch.attention = parse_enum<AttentionKind, 4>(take_until(s, "+"), "attention kind");
  if (consume(s, "+moe(dense)")) {
  } else if (consume(s, "+moe(sparse,e=")) {
    SparseMoE m;
    m.num_experts = parse_int(s);
    if (!consume(s, ",k=")) throw ConfigParseError("expected ',k='");
    m.routing_top_k = parse_int(s);
    if (!consume(s, ")")) throw ConfigParseError("expected ')'");
    c.arch.moe.sparse = m;
  } else {
    throw ConfigParseError("expected '+moe(dense)' or '+moe(sparse,...)'");
  }
  if (!consume(s, "|ft=")) throw ConfigParseError("expected '|ft='");
  if (!consume(s, "Full")) {
    PeftConfig p;
    p.method = parse_enum<PeftMethod, 4>(take_until(s, "("), "fine-tuning method");
    if (!consume(s, "(r=")) throw ConfigParseError("expected '(r='");
    p.rank = parse_int(s);
    if (consume(s, ",a=r)")) {
      p.alpha_multiplier = 1;
    } else if (consume(s, ",a=")) {
      p.alpha_multiplier = parse_int(s);
      if (!consume(s, "r)")) throw ConfigParseError("expected 'r)'");
    } else {
      throw ConfigParseError("expected ',a='");
    }
    c.ft.peft = p;
  }
  if (!consume(s, "|inf=")) throw ConfigParseError("expected '|inf='");
  if (!consume(s, "FP16")) {
    Quantization q;
    q.precision = parse_enum<Precision, 3>(take_until(s, "/"), "precision");
    if (!consume(s, "/")) throw ConfigParseError("expected '/'");
    q.method = parse_enum<QuantMethod, 3>(take_until(s, "+"), "quantization method");
    c.inf.quant.quantized = q;
  }
  if (!consume(s, "+kv=")) throw ConfigParseError("expected '+kv='");
  c.inf.kv_cache = parse_enum<KvCacheKind, 3>(s, "kv cache kind");

  static const ConfigSpace full_space = ConfigSpace::full();
  if (!validate(c, full_space))
    throw ConfigParseError("configuration outside the full space: " + std::string(text));
  if (to_canonical(c) != text) throw ConfigParseError("non-canonical configuration text: " + std::string(text));
  return c;
}

}  // namespace effsearch
