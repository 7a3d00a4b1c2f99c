// SPDX-License-Identifier: Apache-2.0
#include "effsearch/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace effsearch {

namespace {

template <typename E, std::size_t N>
E enum_from(const Json& j, std::string_view what) {
  const auto s = j.get<std::string>();
  for (std::size_t i = 0; i < N; ++i)
    if (to_string(static_cast<E>(i)) == s) return static_cast<E>(i);
  throw ConfigParseError("unknown " + std::string(what) + " '" + s + "'");
}

}  // namespace

void to_json(Json& j, const EfficiencyConfig& c) {
  Json moe;
  if (c.arch.moe.sparse) {
    moe = {{"kind", "sparse"},
           {"num_experts", c.arch.moe.sparse->num_experts},
           {"routing_top_k", c.arch.moe.sparse->routing_top_k}};
  } else {
    moe = {{"kind", "dense"}};
  }
  Json ft;
  if (c.ft.peft) {
    ft = {{"method", to_string(c.ft.peft->method)},
          {"rank", c.ft.peft->rank},
          {"alpha_multiplier", c.ft.peft->alpha_multiplier}};
  } else {
    ft = {{"method", "Full"}};
  }
  Json quant;
  if (c.inf.quant.quantized) {
    quant = {{"precision", to_string(c.inf.quant.quantized->precision)},
             {"method", to_string(c.inf.quant.quantized->method)}};
  } else {
    quant = {{"precision", "FP16"}};
  }
  j = Json{{"arch", {{"attention", to_string(c.arch.attention)}, {"moe", moe}}},
           {"ft", ft},
           {"inf", {{"quant", quant}, {"kv_cache", to_string(c.inf.kv_cache)}}}};
}

void from_json(const Json& j, EfficiencyConfig& c) {
  c = EfficiencyConfig{};
  const auto& arch = j.at("arch");
  c.arch.attention = enum_from<AttentionKind, 4>(arch.at("attention"), "attention kind");
  const auto& moe = arch.at("moe");
  const auto kind = moe.at("kind").get<std::string>();
  if (kind == "sparse") {
    c.arch.moe.sparse = SparseMoE{moe.at("num_experts").get<int>(), moe.at("routing_top_k").get<int>()};
  } else if (kind != "dense") {
    throw ConfigParseError("unknown moe kind '" + kind + "'");
  }
  const auto& ft = j.at("ft");
  if (ft.at("method").get<std::string>() != "Full") {
    c.ft.peft = PeftConfig{enum_from<PeftMethod, 4>(ft.at("method"), "fine-tuning method"),
                           ft.at("rank").get<int>(), ft.at("alpha_multiplier").get<int>()};
  }
  const auto& inf = j.at("inf");
  const auto& quant = inf.at("quant");
  if (quant.at("precision").get<std::string>() != "FP16") {
    c.inf.quant.quantized = Quantization{enum_from<Precision, 3>(quant.at("precision"), "precision"),
                                         enum_from<QuantMethod, 3>(quant.at("method"), "quantization method")};
  }
  c.inf.kv_cache = enum_from<KvCacheKind, 3>(inf.at("kv_cache"), "kv cache kind");
  if (!validate(c, ConfigSpace::full())) throw ConfigParseError("structured configuration outside the full space");
}

void to_json(Json& j, const PerformanceVector& p) {
  j = Json{{"accuracy_pct", p.accuracy_pct},
           {"latency_ms", p.latency_ms},
           {"memory_gb", p.memory_gb},
           {"energy_j", p.energy_j}};
}

void from_json(const Json& j, PerformanceVector& p) {
  p.accuracy_pct = j.at("accuracy_pct").get<double>();
  p.latency_ms = j.at("latency_ms").get<double>();
  p.memory_gb = j.at("memory_gb").get<double>();
  p.energy_j = j.at("energy_j").get<double>();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or_inf(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

void to_json(Json& j, const HardwareSpec& h) {
  j = Json{{"name", h.name},
           {"memory_cap_gb", number_or_null(h.memory_cap_gb)},
           {"power_cap_w", number_or_null(h.power_cap_w)}};
}

void from_json(const Json& j, HardwareSpec& h) {
  h.name = j.value("name", std::string("unconstrained"));
  h.memory_cap_gb = number_or_inf(j.at("memory_cap_gb"));
  h.power_cap_w = number_or_inf(j.at("power_cap_w"));
}

void to_json(Json& j, const PreferenceWeights& w) {
  j = Json{{"w_acc", w.acc}, {"w_lat", w.lat}, {"w_mem", w.mem}, {"w_energy", w.energy}};
}

void from_json(const Json& j, PreferenceWeights& w) {
  w.acc = j.value("w_acc", 0.0);
  w.lat = j.value("w_lat", 0.0);
  w.mem = j.value("w_mem", 0.0);
  w.energy = j.value("w_energy", 0.0);
}

void to_json(Json& j, const ModelDescriptor& m) {
  j = Json{{"name", m.name},
           {"param_count", m.param_count},
           {"family", m.family},
           {"layer_count", m.layer_count},
           {"hidden_dim", m.hidden_dim}};
}

void from_json(const Json& j, ModelDescriptor& m) {
  m.name = j.at("name").get<std::string>();
  m.param_count = j.at("param_count").get<double>();
  m.family = j.at("family").get<std::string>();
  m.layer_count = j.value("layer_count", 0);
  m.hidden_dim = j.value("hidden_dim", 0);
}

void to_json(Json& j, const TaskDescriptor& t) {
  j = Json{{"name", t.name},
           {"domain", to_string(t.domain)},
           {"difficulty", t.difficulty},
           {"sequence_length", t.sequence_length}};
}

void from_json(const Json& j, TaskDescriptor& t) {
  t.name = j.at("name").get<std::string>();
  t.domain = parse_task_domain(j.at("domain").get<std::string>());
  t.difficulty = j.at("difficulty").get<double>();
  t.sequence_length = j.at("sequence_length").get<int>();
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return Json::parse(in);
}

}  // namespace effsearch
