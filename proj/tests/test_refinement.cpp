// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "effsearch/landscape.hpp"
#include "effsearch/predictor.hpp"
#include "effsearch/refinement.hpp"
#include "effsearch/replay.hpp"

using namespace effsearch;

namespace {

RefinementParams small_params(std::uint64_t seed) {
  RefinementParams p;
  p.initial_sample_size = 30;
  p.iterations = 2;
  p.evaluations_per_iteration = 5;
  p.search.population_size = 20;
  p.search.generations = 5;
  p.boosting.n_estimators = 30;
  p.boosting.max_depth = 4;
  p.ensemble_size = 2;
  p.seed = seed;
  return p;
}

const HardwareSpec kHw{"cap", 40.0, std::numeric_limits<double>::infinity()};

ObjectivePrediction with_latency_var(double var) {
  ObjectivePrediction p{};
  p[1].var = var;
  return p;
}

}  // namespace

TEST_CASE("refinement parameter validation") {
  CHECK_NOTHROW(validate(RefinementParams{}));
  auto p = small_params(0);
  p.initial_sample_size = 9;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = small_params(0);
  p.iterations = -1;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = small_params(0);
  p.evaluations_per_iteration = 0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = small_params(0);
  p.ensemble_size = 1;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = small_params(0);
  p.search.population_size = 3;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("uncertainty scores normalize variance by squared archive range") {
  const std::vector<ObjectivePrediction> preds{with_latency_var(0), with_latency_var(4), with_latency_var(1)};
  // latency range 2; accuracy varies too but has no variance; memory and energy have zero range
  const std::vector<PerformanceVector> archive{{50, 1, 2, 3}, {60, 3, 2, 3}};
  const auto s = uncertainty_scores(preds, archive);
  CHECK(s == std::vector<double>{0.0, 1.0, 0.25});
  // top two by score: the second and third entries
  std::vector<std::size_t> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  CHECK(order[0] == 1);
  CHECK(order[1] == 2);
}

TEST_CASE("top-k selection agrees with a recomputed ranking and skips measured configs") {
  const auto land = SyntheticLandscape::generate(1, LandscapeProfile::Default);
  auto p = small_params(3);
  p.iterations = 0;
  const auto run = run_adaptive_optimization(ConfigSpace::full(), land, kHw, land.model(), land.task(), p);
  const SurrogatePredictor predictor(run.ensemble, land.model(), land.task());
  const auto search = run_search(ConfigSpace::full(), predictor, kHw, p.search);
  REQUIRE(search.archive.size() >= 4);

  std::vector<ObjectivePrediction> preds;
  for (const auto& e : search.archive.entries()) preds.push_back(predictor.mean_var(e.config));
  const auto scores = uncertainty_scores(preds, search.archive.performances());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto top = select_topk_uncertain(search.archive, run.ensemble, land.model(), land.task(), {}, 3);
  REQUIRE(top.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(top[i] == search.archive.entries()[order[i]].config);

  const std::set<EfficiencyConfig> measured{top[0]};
  const auto next = select_topk_uncertain(search.archive, run.ensemble, land.model(), land.task(), measured, 3);
  CHECK(std::find(next.begin(), next.end(), top[0]) == next.end());
  CHECK(next[0] == top[1]);
  const auto all = select_topk_uncertain(search.archive, run.ensemble, land.model(), land.task(), {}, 10000);
  CHECK(all.size() == search.archive.size());
}

TEST_CASE("refinement budget, no re-measurement and a measured archive") {
  const auto land = SyntheticLandscape::generate(2, LandscapeProfile::Default);
  const CountingEvaluator counted(land);
  const auto p = small_params(5);
  const auto run = run_adaptive_optimization(ConfigSpace::full(), counted, kHw, land.model(), land.task(), p);
  const auto& t = run.trace;
  std::size_t selected = 0;
  for (const auto& it : t.iterations) selected += it.selected.size();
  CHECK(t.iterations.size() == 2);
  CHECK(t.true_evaluations() == 30 + selected);
  CHECK(counted.calls() == t.true_evaluations());
  std::set<EfficiencyConfig> distinct;
  for (const auto& r : t.evaluations) distinct.insert(r.config);
  CHECK(distinct.size() == t.evaluations.size());
  CHECK(t.evaluations.front().config == ConfigSpace::full().first());
  CHECK(t.baseline == ConfigSpace::full().first());

  REQUIRE_FALSE(run.archive.empty());
  for (const auto& e : run.archive.entries()) {
    CHECK(e.measured);
    CHECK(is_feasible(e.perf, kHw));
    REQUIRE(t.measured(e.config));
    CHECK(*t.measured(e.config) == e.perf);
  }
  for (const auto& it : t.iterations)
    for (const auto& s : it.selected) CHECK(s.measured == land.evaluate(s.config));

  const auto trend = utility_trend(t, p.reporting_weights);
  REQUIRE(trend.size() == 3);
  for (std::size_t r = 1; r < trend.size(); ++r) CHECK(*trend[r] >= *trend[r - 1]);
}

TEST_CASE("zero refinement rounds spend exactly the initial sample") {
  const auto land = SyntheticLandscape::generate(3, LandscapeProfile::Default);
  auto p = small_params(1);
  p.iterations = 0;
  const auto run = run_adaptive_optimization(ConfigSpace::full(), land, kHw, land.model(), land.task(), p);
  CHECK(run.trace.iterations.empty());
  CHECK(run.trace.true_evaluations() == 30);
  CHECK(run.trace.best_utility(0).has_value());
}

TEST_CASE("refinement is deterministic and its trace round-trips") {
  const auto land = SyntheticLandscape::generate(4, LandscapeProfile::Default);
  const auto p = small_params(8);
  const auto a = run_adaptive_optimization(ConfigSpace::full(), land, kHw, land.model(), land.task(), p);
  auto q = p;
  q.exec = Exec::Parallel;
  const auto b = run_adaptive_optimization(ConfigSpace::full(), land, kHw, land.model(), land.task(), q);
  CHECK(trace_json(a.trace).dump() == trace_json(b.trace).dump());
  CHECK(a.ensemble == b.ensemble);

  const auto j = trace_json(a.trace);
  CHECK(trace_json(trace_from_json(j)) == j);
  CHECK(j["header"]["format"] == "effsearch-trace");
  auto broken = j;
  broken["header"]["true_evaluations"] = 1;
  CHECK_THROWS_AS(trace_from_json(broken), std::runtime_error);
  CHECK_THROWS_AS(trace_from_json(Json{{"format", "other"}}), std::runtime_error);
  std::ostringstream out;
  write_trace(out, a.trace);
  CHECK(Json::parse(out.str()) == j);
}

TEST_CASE("evaluator failures surface with the partial trace") {
  const auto land = SyntheticLandscape::generate(5, LandscapeProfile::Default);
  auto data = std::make_shared<ReplayDataset>();
  const auto space = ConfigSpace::full();
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    const auto c = i == 0 ? space.first() : sample_uniform(space, rng);
    if (data->find(c, "m", "t", "h")) continue;
    data->add(MeasurementRecord{c, "m", "t", "h", land.evaluate(c)});
  }
  const ReplayEvaluator replay(data, "m", "t", "h");
  try {
    run_adaptive_optimization(space, replay, kHw, land.model(), land.task(), small_params(2));
    FAIL("expected a refinement error");
  } catch (const RefinementError& e) {
    CHECK(e.partial_trace().evaluator == replay.identity());
    CHECK(e.partial_trace().true_evaluations() < 30);
  }
}

TEST_CASE("final validation measures predicted members and drops infeasible ones") {
  const auto land = SyntheticLandscape::generate(6, LandscapeProfile::Default);
  const auto all = enumerate(ConfigSpace::full());
  ParetoArchive predicted;
  Rng rng(2);
  for (int i = 0; i < 60; ++i) {
    const auto c = all[rng.uniform_index(all.size())];
    auto p = land.evaluate(c);
    p.accuracy_pct += 0.3;
    predicted.insert(ArchiveEntry{c, p, true, false});
  }
  const auto measured_entry = predicted.entries().front();
  ParetoArchive mixed = predicted;
  const CountingEvaluator counted(land);
  const auto out = final_validate(mixed, counted, kHw);
  CHECK(counted.calls() == predicted.size());
  for (const auto& e : out.entries()) {
    CHECK(e.measured);
    CHECK(is_feasible(e.perf, kHw));
    CHECK(e.perf == land.evaluate(e.config));
  }

  // a member that cannot be measured is skipped with a warning
  auto data = std::make_shared<ReplayDataset>();
  data->add(MeasurementRecord{measured_entry.config, "m", "t", "h", land.evaluate(measured_entry.config)});
  const ReplayEvaluator replay(data, "m", "t", "h");
  std::vector<std::string> warnings;
  const auto partial = final_validate(predicted, replay, HardwareSpec{}, [&](const std::string& w) { warnings.push_back(w); });
  CHECK(partial.size() == 1);
  CHECK(warnings.size() == predicted.size() - 1);
}
