// SPDX-License-Identifier: Apache-2.0
//
// Hierarchical efficiency-configuration space: architecture, fine-tuning and
// inference stages, each a small product of categorical axes with variant
// sub-fields (sparse MoE, PEFT, quantized precision).
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "effsearch/descriptors.hpp"
#include "effsearch/rng.hpp"

namespace effsearch {

enum class AttentionKind : std::uint8_t { MHA, MQA, GQA, MLA };
enum class PeftMethod : std::uint8_t { LoRA, QLoRA, DoRA, RSLoRA };
enum class Precision : std::uint8_t { FP8, INT8, INT4 };
enum class QuantMethod : std::uint8_t { GPTQ, AWQ, SmoothQuant };
enum class KvCacheKind : std::uint8_t { Full, MqaStyle, GqaStyle };

struct SparseMoE {
  int num_experts = 2;    // {2, 4, 8}
  int routing_top_k = 1;  // {1, 2}
  auto operator<=>(const SparseMoE&) const = default;
};

/// Dense when `sparse` is empty.
struct MoESetting {
  std::optional<SparseMoE> sparse;
  bool is_dense() const { return !sparse.has_value(); }
  auto operator<=>(const MoESetting&) const = default;
};

struct ArchConfig {
  AttentionKind attention = AttentionKind::MHA;
  MoESetting moe;
  auto operator<=>(const ArchConfig&) const = default;
};

struct PeftConfig {
  PeftMethod method = PeftMethod::LoRA;
  int rank = 8;              // {8, 16, 32, 64, 128}
  int alpha_multiplier = 1;  // {1, 2, 4}; alpha = alpha_multiplier * rank
  int alpha() const { return alpha_multiplier * rank; }
  auto operator<=>(const PeftConfig&) const = default;
};

/// Full fine-tuning when `peft` is empty.
struct FineTuneConfig {
  std::optional<PeftConfig> peft;
  bool is_full() const { return !peft.has_value(); }
  auto operator<=>(const FineTuneConfig&) const = default;
};

struct Quantization {
  Precision precision = Precision::INT8;
  QuantMethod method = QuantMethod::GPTQ;
  auto operator<=>(const Quantization&) const = default;
};

/// FP16 when `quantized` is empty.
struct QuantSetting {
  std::optional<Quantization> quantized;
  bool is_fp16() const { return !quantized.has_value(); }
  auto operator<=>(const QuantSetting&) const = default;
};

struct InferenceConfig {
  QuantSetting quant;
  KvCacheKind kv_cache = KvCacheKind::Full;
  auto operator<=>(const InferenceConfig&) const = default;
};

/// One point of the space. The defaulted ordering is the canonical
/// stage-lexicographic order: declared enum order, absent variants first,
/// sub-fields ascending.
struct EfficiencyConfig {
  ArchConfig arch;
  FineTuneConfig ft;
  InferenceConfig inf;
  auto operator<=>(const EfficiencyConfig&) const = default;
};

enum class Stage : std::uint8_t { Arch, FineTune, Inference };
inline constexpr std::array<Stage, 3> kStages = {Stage::Arch, Stage::FineTune, Stage::Inference};

/// Categorical axes. Axis values are small integer codes:
///   Attention: AttentionKind index      Experts: 0 (dense), 2, 4, 8
///   TopK: 1, 2                          FtMethod: 0 (full), 1 + PeftMethod
///   Rank: 8..128                        Alpha: alpha multiplier 1, 2, 4
///   Precision: 0 (FP16), 1 + Precision  QuantMethod: QuantMethod index
///   KvCache: KvCacheKind index
enum class Axis : std::uint8_t {
  Attention,
  Experts,
  TopK,
  FtMethod,
  Rank,
  Alpha,
  Precision,
  QuantMethod,
  KvCache,
};
inline constexpr std::size_t kAxisCount = 9;
inline constexpr std::array<Axis, kAxisCount> kAxes = {
    Axis::Attention, Axis::Experts,   Axis::TopK,        Axis::FtMethod, Axis::Rank,
    Axis::Alpha,     Axis::Precision, Axis::QuantMethod, Axis::KvCache};

Stage stage_of(Axis a);
std::string_view axis_name(Axis a);
std::optional<Axis> parse_axis(std::string_view name);
/// Human-readable label for one axis value code, e.g. "GQA", "dense", "r=32".
std::string axis_value_label(Axis a, int code);
/// Full domain of an axis in canonical order.
std::span<const int> full_axis_domain(Axis a);

/// Code of `a` in `c`, or nullopt when the axis is inactive (e.g. rank under
/// full fine-tuning).
std::optional<int> axis_value(const EfficiencyConfig& c, Axis a);

class ConfigSpace {
 public:
  /// Every value of every axis.
  static ConfigSpace full();
  /// One value per axis: MHA, dense, full fine-tuning, FP16, full KV cache.
  static ConfigSpace singleton();
  /// Named presets: "full", "singleton", "dense", "peft-only", "quantized".
  /// Throws std::invalid_argument for unknown names.
  static ConfigSpace named(std::string_view name);
  static std::vector<std::string> preset_names();

  /// Throws std::invalid_argument if any axis is empty or holds a value
  /// outside its full domain.
  ConfigSpace(std::string name, std::array<std::vector<int>, kAxisCount> allowed);

  const std::string& name() const { return name_; }
  std::span<const int> allowed(Axis a) const { return allowed_[static_cast<std::size_t>(a)]; }
  bool allows(Axis a, int code) const;

  bool allows_sparse() const;
  bool allows_dense() const;
  bool allows_peft() const;
  bool allows_full_ft() const;
  bool allows_quantized() const;
  bool allows_fp16() const;

  std::size_t arch_count() const;
  std::size_t ft_count() const;
  std::size_t inf_count() const;
  std::size_t size() const { return arch_count() * ft_count() * inf_count(); }

  std::vector<ArchConfig> arch_configs() const;
  std::vector<FineTuneConfig> ft_configs() const;
  std::vector<InferenceConfig> inf_configs() const;

  /// First configuration in canonical order.
  EfficiencyConfig first() const;

 private:
  std::string name_;
  std::array<std::vector<int>, kAxisCount> allowed_;
};

/// Every valid configuration exactly once, in canonical order.
std::vector<EfficiencyConfig> enumerate(const ConfigSpace& space);

bool validate(const EfficiencyConfig& c, const ConfigSpace& space);

/// Uniform over enumerate(space).
EfficiencyConfig sample_uniform(const ConfigSpace& space, Rng& rng);

/// Position of `c` in enumerate(space). Precondition: validate(c, space).
std::size_t ordinal(const EfficiencyConfig& c, const ConfigSpace& space);
/// Inverse of ordinal(). Precondition: index < space.size().
EfficiencyConfig config_at(const ConfigSpace& space, std::size_t index);

/// Sets axis `a` to `code`, switching variants where needed (activating a
/// variant takes the first allowed value of each newly active sub-field).
/// Returns nullopt if `code` is not allowed in `space`.
std::optional<EfficiencyConfig> with_axis_value(const EfficiencyConfig& c, Axis a, int code,
                                                const ConfigSpace& space);

/// Resamples one uniformly chosen mutable field of `stage` to a different
/// allowed value. Activating a variant re-rolls its sub-fields uniformly.
/// Returns `c` unchanged when the stage has no field with an alternative.
EfficiencyConfig mutate_field(const EfficiencyConfig& c, Stage stage, const ConfigSpace& space,
                              Rng& rng);

// ---------------------------------------------------------------------------
// Feature encoding

inline constexpr std::size_t kConfigFeatureCount = 23;
inline constexpr std::size_t kFeatureCount =
    kConfigFeatureCount + 1 + kModelFamilies.size() + kTaskDomainCount + 2;

using FeatureVector = std::array<double, kFeatureCount>;

FeatureVector encode(const EfficiencyConfig& c, const ModelDescriptor& model,
                     const TaskDescriptor& task);
/// Names of the feature slots in layout order.
const std::array<std::string_view, kFeatureCount>& feature_names();
/// Hash of the feature layout; stored in model files.
std::uint64_t feature_schema_hash();

// ---------------------------------------------------------------------------
// Canonical text form, e.g.
//   arch=GQA+moe(sparse,e=4,k=2)|ft=LoRA(r=32,a=2r)|inf=INT4/AWQ+kv=GQA

class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_canonical(const EfficiencyConfig& c);
/// Throws ConfigParseError on anything that is not byte-exact canonical text.
EfficiencyConfig parse_canonical(std::string_view text);

std::string_view to_string(AttentionKind k);
std::string_view to_string(PeftMethod m);
std::string_view to_string(Precision p);
std::string_view to_string(QuantMethod m);
std::string_view to_string(KvCacheKind k);

}  // namespace effsearch
