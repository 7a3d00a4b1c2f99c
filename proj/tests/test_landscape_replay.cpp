// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "effsearch/landscape.hpp"
#include "effsearch/replay.hpp"

using namespace effsearch;

namespace {

const std::string kFixture = std::string(EFFSEARCH_FIXTURES) + "/replay_small.csv";

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("landscape generation is deterministic") {
  const auto a = SyntheticLandscape::generate(5, LandscapeProfile::Default);
  const auto b = SyntheticLandscape::generate(5, LandscapeProfile::Default);
  const auto c = SyntheticLandscape::generate(6, LandscapeProfile::Default);
  CHECK(a.definition() == b.definition());
  CHECK(a.definition() != c.definition());
  CHECK(a.identity() == "synthetic:default:seed=5");
  const auto cfg = parse_canonical("arch=GQA+moe(sparse,e=4,k=2)|ft=LoRA(r=32,a=2r)|inf=INT4/AWQ+kv=GQA");
  CHECK(a.evaluate(cfg) == a.evaluate(cfg));
  CHECK(a.evaluate(cfg) == b.evaluate(cfg));
}

TEST_CASE("without interactions the predictor is base plus main effects") {
  const auto land = SyntheticLandscape::generate(7, LandscapeProfile::InteractionHeavy).without_interactions();
  Rng rng(1);
  const auto space = ConfigSpace::full();
  for (int i = 0; i < 500; ++i) {
    const auto c = sample_uniform(space, rng);
    EffectRow sum = land.base();
    for (Axis a : kAxes) {
      const auto v = axis_value(c, a);
      if (!v) continue;
      for (std::size_t m = 0; m < 4; ++m) sum[m] += land.effect(a, *v)[m];
    }
    const auto z = land.linear_predictor(c);
    for (std::size_t m = 0; m < 4; ++m) CHECK(z[m] == doctest::Approx(sum[m]));
    const auto p = land.evaluate_noiseless(c);
    CHECK(p.accuracy_pct == doctest::Approx(100.0 * logistic(sum[0])));
    CHECK(p.latency_ms == doctest::Approx(std::exp(sum[1])));
    CHECK(p.memory_gb == doctest::Approx(std::exp(sum[2])));
    CHECK(p.energy_j == doctest::Approx(std::exp(sum[3])));
  }
}

TEST_CASE("int4 with sparse experts pays the accuracy penalty") {
  const auto land = SyntheticLandscape::generate(2, LandscapeProfile::Default);
  CHECK(land.int4_sparse_penalty_pp() > 0.0);
  const auto c = parse_canonical("arch=GQA+moe(sparse,e=8,k=2)|ft=Full|inf=INT4/GPTQ+kv=GQA");
  const auto z = land.linear_predictor(c);
  CHECK(land.evaluate_noiseless(c).accuracy_pct ==
        doctest::Approx(100.0 * logistic(z[0]) - land.int4_sparse_penalty_pp()));
}

TEST_CASE("noise levels") {
  const auto land = SyntheticLandscape::generate(3, LandscapeProfile::Default);
  const auto quiet = land.with_noise(0.0, 0.0);
  const auto cfg = ConfigSpace::full().first();
  CHECK(quiet.evaluate(cfg) == land.evaluate_noiseless(cfg));
  CHECK_THROWS_AS(land.with_noise(-1.0, 0.0), std::invalid_argument);

  Rng rng(4);
  const auto space = ConfigSpace::full();
  double sum = 0, sum2 = 0, acc2 = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_uniform(space, rng);
    const double d = std::log(land.evaluate(c).latency_ms / land.evaluate_noiseless(c).latency_ms);
    sum += d;
    sum2 += d * d;
    const double e = land.evaluate(c).accuracy_pct - land.evaluate_noiseless(c).accuracy_pct;
    acc2 += e * e;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.005);
  CHECK(std::sqrt(sum2 / n - mean * mean) == doctest::Approx(0.05).epsilon(0.06));
  CHECK(std::sqrt(acc2 / n) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("shifted landscapes move only the chosen axis") {
  const auto land = SyntheticLandscape::generate(4, LandscapeProfile::Default);
  const auto shifted = land.shifted(Axis::Precision, 0.1, 77);
  CHECK(shifted.identity() != land.identity());
  for (Axis a : kAxes) {
    for (int code : full_axis_domain(a)) {
      const auto& before = land.effect(a, code);
      const auto& after = shifted.effect(a, code);
      for (std::size_t m = 0; m < 4; ++m) {
        if (a == Axis::Precision)
          CHECK(std::abs(after[m] - before[m]) <= 0.1 + 1e-12);
        else
          CHECK(after[m] == before[m]);
      }
    }
  }
}

TEST_CASE("landscape profiles parse") {
  CHECK(parse_landscape_profile("memory-tight") == LandscapeProfile::MemoryTight);
  CHECK(to_string(LandscapeProfile::InteractionHeavy) == "interaction-heavy");
  CHECK_THROWS_AS(parse_landscape_profile("spiky"), std::invalid_argument);
}

TEST_CASE("csv splitting") {
  CHECK(split_csv_line("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
  CHECK(split_csv_line("a,,") == std::vector<std::string>{"a", "", ""});
  CHECK(csv_field("x,y") == "\"x,y\"");
  CHECK(csv_field("plain") == "plain");
  CHECK_THROWS(split_csv_line("\"open"));
}

TEST_CASE("replay fixture loads and looks up exact keys") {
  const auto data = std::make_shared<const ReplayDataset>(ReplayDataset::load(kFixture));
  CHECK(data->size() == 5);
  const ReplayEvaluator eval(data, "llama-2-7b", "mmlu", "a100", "fixture");
  const auto mobile = parse_canonical("arch=MQA+moe(dense)|ft=LoRA(r=16,a=2r)|inf=INT4/AWQ+kv=MQA");
  const auto p = eval.evaluate(mobile);
  CHECK(p.accuracy_pct == 68.2);
  CHECK(p.latency_ms == 25.8);
  CHECK(p.memory_gb == 8.1);
  CHECK(p.energy_j == 0.42);
  CHECK_THROWS_AS(eval.evaluate(parse_canonical("arch=MLA+moe(dense)|ft=Full|inf=FP16+kv=Full")), ReplayMissError);
  const ReplayEvaluator other(data, "mistral-7b", "mmlu", "a100");
  CHECK_THROWS_AS(other.evaluate(mobile), EvaluationError);

  // baseline and optimized rows give the hand-computed score
  const auto base = eval.evaluate(ConfigSpace::full().first());
  const double oracle = std::cbrt((45.2 / 25.8) * (13.5 / 8.1) * (0.85 / 0.42)) * 68.2 / 68.5;
  CHECK(efficiency_score(p, base) == doctest::Approx(oracle));
  CHECK(std::abs(oracle - 1.800) < 0.005);
}

TEST_CASE("mobile scenario row") {
  const auto data = std::make_shared<const ReplayDataset>(ReplayDataset::load(kFixture));
  const ReplayEvaluator eval(data, "llama-2-7b", "mmlu", "mobile");
  const auto p = eval.evaluate(parse_canonical("arch=MQA+moe(dense)|ft=LoRA(r=16,a=2r)|inf=INT4/AWQ+kv=MQA"));
  CHECK(p.memory_gb == 2.1);
  CHECK(p.latency_ms == 45.0);
}

TEST_CASE("replay csv round-trips through write_csv") {
  const auto data = ReplayDataset::load(kFixture);
  std::ostringstream out;
  data.write_csv(out);
  std::istringstream in(out.str());
  const auto again = ReplayDataset::parse(in);
  REQUIRE(again.size() == data.size());
  const auto a = data.records();
  const auto b = again.records();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].config == b[i].config);
    CHECK(a[i].perf == b[i].perf);
    CHECK(a[i].model == b[i].model);
  }
}

TEST_CASE("replay parse errors carry line numbers") {
  const std::string header =
      "config,model,task,hardware,accuracy_pct,latency_ms,memory_gb,energy_j,runs,warmup,seq_in,seq_out\n";
  const std::string row = "\"arch=MHA+moe(dense)|ft=Full|inf=FP16+kv=Full\",m,t,h,50,1,1,1,100,10,512,128\n";
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return ReplayDataset::parse(in);
  };
  CHECK(parse(header + row).size() == 1);
  CHECK_THROWS_AS(parse("bad header\n"), ReplayParseError);
  CHECK_THROWS_AS(parse(""), ReplayParseError);
  CHECK_THROWS_AS(parse(header + row + row), DuplicateKeyError);
  try {
    parse(header + row + "\"arch=MHA+moe(dense)|ft=Full|inf=FP16+kv=Full\",m,t,h2,150,1,1,1,100,10,512,128\n");
    FAIL("expected a parse error");
  } catch (const ReplayParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse(header + "\"arch=XYZ\",m,t,h,50,1,1,1,100,10,512,128\n"), ReplayParseError);
  CHECK_THROWS_AS(parse(header + "\"arch=MHA+moe(dense)|ft=Full|inf=FP16+kv=Full\",m,t,h,50,1,1\n"),
                  ReplayParseError);
}
