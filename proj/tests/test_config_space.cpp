// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "effsearch/config_space.hpp"

using namespace effsearch;

namespace {

// Independent enumeration from the raw axis domains.
std::size_t brute_force_count() {
  std::size_t arch = 0;
  for (int a = 0; a < 4; ++a)
    for (int e : {0, 2, 4, 8})
      for (int k : {1, 2}) {
        if (e == 0 && k == 2) continue;
        ++arch;
      }
  std::size_t ft = 1;
  for (int m = 0; m < 4; ++m)
    for (int r : {8, 16, 32, 64, 128})
      for (int al : {1, 2, 4}) {
        (void)m, (void)r, (void)al;
        ++ft;
      }
  std::size_t inf = 0;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 3; ++q)
      for (int kv = 0; kv < 3; ++kv) {
        if (p == 0 && q > 0) continue;
        ++inf;
      }
  CHECK(arch == 28);
  CHECK(ft == 61);
  CHECK(inf == 30);
  return arch * ft * inf;
}

}  // namespace

TEST_CASE("full space cardinalities match brute-force enumeration") {
  const auto space = ConfigSpace::full();
  CHECK(space.arch_count() == 28);
  CHECK(space.ft_count() == 61);
  CHECK(space.inf_count() == 30);
  CHECK(space.size() == brute_force_count());
  CHECK(space.size() == 51240);
}

TEST_CASE("axis domains sum to 33") {
  std::size_t total = 0;
  for (Axis a : kAxes) total += full_axis_domain(a).size();
  CHECK(total == 33);
}

TEST_CASE("enumerate is sorted, unique and valid") {
  const auto space = ConfigSpace::full();
  const auto all = enumerate(space);
  REQUIRE(all.size() == space.size());
  CHECK(std::is_sorted(all.begin(), all.end()));
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  CHECK(all.front() == space.first());
  for (std::size_t i = 0; i < all.size(); i += 97) {
    CHECK(validate(all[i], space));
    CHECK(ordinal(all[i], space) == i);
    CHECK(config_at(space, i) == all[i]);
  }
}

TEST_CASE("canonical text round-trips every configuration") {
  std::set<std::string> seen;
  for (const auto& c : enumerate(ConfigSpace::full())) {
    const auto s = to_canonical(c);
    CHECK(parse_canonical(s) == c);
    seen.insert(s);
  }
  CHECK(seen.size() == 51240);
}

TEST_CASE("canonical text examples") {
  EfficiencyConfig c;
  c.arch.attention = AttentionKind::GQA;
  c.arch.moe.sparse = SparseMoE{4, 2};
  c.ft.peft = PeftConfig{PeftMethod::LoRA, 32, 2};
  c.inf.quant.quantized = Quantization{Precision::INT4, QuantMethod::AWQ};
  c.inf.kv_cache = KvCacheKind::GqaStyle;
  CHECK(to_canonical(c) == "arch=GQA+moe(sparse,e=4,k=2)|ft=LoRA(r=32,a=2r)|inf=INT4/AWQ+kv=GQA");
  CHECK(to_canonical(EfficiencyConfig{}) == "arch=MHA+moe(dense)|ft=Full|inf=FP16+kv=Full");
}

TEST_CASE("parse_canonical rejects malformed text") {
  for (const char* bad : {"", "arch=GQA", "arch=XYZ+moe(dense)|ft=Full|inf=FP16+kv=Full",
                          "arch=MHA+moe(dense)|ft=LoRA(r=7,a=r)|inf=FP16+kv=Full",
                          "arch=MHA+moe(sparse,e=3,k=1)|ft=Full|inf=FP16+kv=Full",
                          "arch=MHA+moe(dense)|ft=Full|inf=FP16+kv=Full ",
                          " arch=MHA+moe(dense)|ft=Full|inf=FP16+kv=Full"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_canonical(bad), ConfigParseError);
  }
}

TEST_CASE("named spaces") {
  CHECK(ConfigSpace::singleton().size() == 1);
  CHECK_THROWS_AS(ConfigSpace::named("nope"), std::invalid_argument);
  for (const auto& name : ConfigSpace::preset_names()) {
    const auto space = ConfigSpace::named(name);
    const auto all = enumerate(space);
    CHECK(all.size() == space.size());
    for (const auto& c : all) CHECK(validate(c, space));
  }
  const auto dense = ConfigSpace::named("dense");
  for (const auto& c : enumerate(dense)) CHECK(c.arch.moe.is_dense());
}

TEST_CASE("sample_uniform covers the space evenly") {
  const auto space = ConfigSpace::full();
  Rng rng(11);
  constexpr int n = 200000;
  int dense = 0;
  int full_ft = 0;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_uniform(space, rng);
    dense += c.arch.moe.is_dense();
    full_ft += c.ft.is_full();
  }
  CHECK(static_cast<double>(dense) / n == doctest::Approx(4.0 / 28.0).epsilon(0.03));
  CHECK(static_cast<double>(full_ft) / n == doctest::Approx(1.0 / 61.0).epsilon(0.08));
}

TEST_CASE("mutate_field stays inside one stage and inside the space") {
  const auto space = ConfigSpace::full();
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const auto c = sample_uniform(space, rng);
    for (Stage s : kStages) {
      const auto m = mutate_field(c, s, space, rng);
      CHECK(validate(m, space));
      CHECK(m != c);
      if (s != Stage::Arch) CHECK(m.arch == c.arch);
      if (s != Stage::FineTune) CHECK(m.ft == c.ft);
      if (s != Stage::Inference) CHECK(m.inf == c.inf);
    }
  }
  const auto single = ConfigSpace::singleton();
  CHECK(mutate_field(single.first(), Stage::Arch, single, rng) == single.first());
}

TEST_CASE("with_axis_value switches variants") {
  const auto space = ConfigSpace::full();
  const auto base = space.first();
  const auto sparse = with_axis_value(base, Axis::Experts, 4, space);
  REQUIRE(sparse);
  CHECK(sparse->arch.moe.sparse->num_experts == 4);
  const auto rank = with_axis_value(base, Axis::Rank, 64, space);
  REQUIRE(rank);
  CHECK(rank->ft.peft->rank == 64);
  CHECK(validate(*rank, space));
  CHECK_FALSE(with_axis_value(base, Axis::TopK, 2, ConfigSpace::named("dense")));
  CHECK_FALSE(axis_value(base, Axis::Rank));
}

TEST_CASE("feature encoding layout") {
  const auto& names = feature_names();
  CHECK(names.size() == 36);
  CHECK(std::set<std::string_view>(names.begin(), names.end()).size() == names.size());
  const auto x = encode(ConfigSpace::full().first(), ModelDescriptor{}, TaskDescriptor{});
  for (double v : x) CHECK(std::isfinite(v));
  CHECK(feature_schema_hash() == feature_schema_hash());
}
