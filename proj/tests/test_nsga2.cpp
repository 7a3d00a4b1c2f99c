// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <limits>
#include <set>
#include <sstream>

#include "effsearch/landscape.hpp"
#include "effsearch/nsga2.hpp"

using namespace effsearch;

namespace {

std::array<std::optional<int>, kAxisCount> axes_of(const EfficiencyConfig& c) {
  std::array<std::optional<int>, kAxisCount> out;
  for (std::size_t i = 0; i < kAxisCount; ++i) out[i] = axis_value(c, kAxes[i]);
  return out;
}

// Two configs with every axis active and differing on every axis.
std::pair<EfficiencyConfig, EfficiencyConfig> opposite_pair() {
  const auto all = enumerate(ConfigSpace::full());
  for (const auto& a : all) {
    const auto va = axes_of(a);
    if (std::any_of(va.begin(), va.end(), [](const auto& v) { return !v; })) continue;
    for (const auto& b : all) {
      const auto vb = axes_of(b);
      bool ok = true;
      for (std::size_t i = 0; i < kAxisCount && ok; ++i) ok = vb[i] && *vb[i] != *va[i];
      if (ok) return {a, b};
    }
  }
  throw std::logic_error("no opposite pair");
}

SearchParams small_search(std::uint64_t seed) {
  SearchParams p;
  p.population_size = 20;
  p.generations = 5;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("search parameter validation") {
  SearchParams p;
  CHECK_NOTHROW(validate(p));
  for (auto bad : {+[](SearchParams& q) { q.population_size = 2; }, +[](SearchParams& q) { q.population_size = 21; },
                   +[](SearchParams& q) { q.generations = 0; }, +[](SearchParams& q) { q.crossover_probability = 1.5; },
                   +[](SearchParams& q) { q.mutation.ft = -0.1; }, +[](SearchParams& q) { q.tournament_size = 0; },
                   +[](SearchParams& q) { q.constraint_margin = -0.05; }}) {
    SearchParams q;
    bad(q);
    CHECK_THROWS_AS(validate(q), std::invalid_argument);
  }
}

TEST_CASE("constrained dominance") {
  Individual feasible{.objectives = {50, 10, 1, 1}, .feasible = true};
  Individual better{.objectives = {60, 10, 1, 1}, .feasible = true};
  Individual infeasible{.objectives = {90, 1, 1, 1}, .feasible = false, .violation = 0.5};
  Individual worse_violation{.objectives = {90, 1, 1, 1}, .feasible = false, .violation = 0.9};
  CHECK(constrained_dominates(feasible, infeasible));
  CHECK_FALSE(constrained_dominates(infeasible, feasible));
  CHECK(constrained_dominates(infeasible, worse_violation));
  CHECK(constrained_dominates(better, feasible));
  CHECK_FALSE(constrained_dominates(feasible, feasible));
}

TEST_CASE("crossover children take every axis from a parent, complementarily") {
  const auto [p1, p2] = opposite_pair();
  Rng rng(1);
  std::set<EfficiencyConfig> seen;
  for (int i = 0; i < 10000; ++i) {
    const auto [c1, c2] = hierarchical_crossover(p1, p2, 1.0, rng);
    const auto a = axes_of(c1), b = axes_of(c2), x = axes_of(p1), y = axes_of(p2);
    for (std::size_t k = 0; k < kAxisCount; ++k) {
      const bool straight = a[k] == x[k] && b[k] == y[k];
      const bool swapped = a[k] == y[k] && b[k] == x[k];
      CHECK((straight || swapped));
    }
    CHECK(validate(c1, ConfigSpace::full()));
    seen.insert(c1);
  }
  // each of the 9 axes is mixed independently
  CHECK(seen.size() == 512);
  Rng r2(2);
  for (int i = 0; i < 100; ++i) CHECK(hierarchical_crossover(p1, p2, 0.0, r2) == std::pair{p1, p2});
}

TEST_CASE("crossover between a variant and its absence swaps the whole variant") {
  const auto a = parse_canonical("arch=GQA+moe(sparse,e=8,k=2)|ft=Full|inf=FP16+kv=Full");
  const auto b = parse_canonical("arch=MHA+moe(dense)|ft=DoRA(r=64,a=4r)|inf=INT4/AWQ+kv=MQA");
  Rng rng(5);
  std::set<EfficiencyConfig> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto [c1, c2] = hierarchical_crossover(a, b, 1.0, rng);
    CHECK(validate(c1, ConfigSpace::full()));
    CHECK(validate(c2, ConfigSpace::full()));
    seen.insert(c1);
  }
  CHECK(seen.size() == 32);
}

TEST_CASE("stage mutation touches only stages that fire") {
  const auto space = ConfigSpace::full();
  Rng rng(3);
  const MutationRates arch_only{1.0, 0.0, 0.0};
  for (int i = 0; i < 500; ++i) {
    const auto c = sample_uniform(space, rng);
    const auto m = stage_mutate(c, arch_only, space, rng);
    CHECK(m.arch != c.arch);
    CHECK(m.ft == c.ft);
    CHECK(m.inf == c.inf);
  }
  const MutationRates none{0.0, 0.0, 0.0};
  const auto c = space.first();
  CHECK(stage_mutate(c, none, space, rng) == c);
}

TEST_CASE("empirical mutation rates") {
  const auto space = ConfigSpace::full();
  Rng rng(11);
  const MutationRates rates;
  std::array<int, 3> hits{};
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_uniform(space, rng);
    const auto m = stage_mutate(c, rates, space, rng);
    hits[0] += m.arch != c.arch;
    hits[1] += m.ft != c.ft;
    hits[2] += m.inf != c.inf;
  }
  CHECK(hits[0] / double(n) == doctest::Approx(0.10).epsilon(0.1));
  CHECK(hits[1] / double(n) == doctest::Approx(0.20).epsilon(0.1));
  CHECK(hits[2] / double(n) == doctest::Approx(0.15).epsilon(0.1));
}

TEST_CASE("tournament selection") {
  std::vector<Individual> pop(10);
  const auto all = enumerate(ConfigSpace::full());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    pop[i].config = all[i];
    pop[i].front_rank = static_cast<int>(i % 3) + 1;
    pop[i].crowding = static_cast<double>(i);
  }
  pop[4].front_rank = 0;
  Rng rng(4);
  // with many entrants the rank-0 member is almost surely drawn
  for (int i = 0; i < 50; ++i) CHECK(tournament_select(pop, 200, rng) == 4);
  std::array<int, 10> counts{};
  for (int i = 0; i < 10000; ++i) ++counts[tournament_select(pop, 1, rng)];
  for (int c : counts) CHECK(c == doctest::Approx(1000).epsilon(0.15));
  CHECK_THROWS(tournament_select(std::span<const Individual>{}, 2, rng));
}

TEST_CASE("constraint-aware initialization") {
  const auto land = SyntheticLandscape::generate(1, LandscapeProfile::Default);
  const auto space = ConfigSpace::full();
  auto p = small_search(1);
  Rng rng(1);
  const auto free = constraint_aware_init(space, land, HardwareSpec{}, p, rng);
  CHECK(free.attempts == 20);
  CHECK(free.infeasible_members == 0);

  const HardwareSpec impossible{"none", 1e-9, 1e-9};
  const auto none = constraint_aware_init(space, land, impossible, p, rng);
  CHECK(none.attempts == 20u * 50u);
  CHECK(none.infeasible_members == 20);
  for (std::size_t i = 1; i < none.population.size(); ++i)
    CHECK(none.population[i - 1].violation <= none.population[i].violation);

  // cap at the median memory: every member is predicted feasible
  std::vector<double> mem;
  for (const auto& c : enumerate(space)) mem.push_back(land.evaluate(c).memory_gb);
  std::nth_element(mem.begin(), mem.begin() + mem.size() / 2, mem.end());
  const HardwareSpec half{"half", mem[mem.size() / 2], std::numeric_limits<double>::infinity()};
  const auto init = constraint_aware_init(space, land, half, p, rng);
  CHECK(init.infeasible_members == 0);
  for (const auto& ind : init.population) CHECK(ind.objectives.memory_gb <= half.memory_cap_gb);
}

TEST_CASE("margin inflates the cap check") {
  const auto land = SyntheticLandscape::generate(1, LandscapeProfile::Default);
  const auto c = ConfigSpace::full().first();
  const auto p = land.evaluate(c);
  const HardwareSpec hw{"edge", p.memory_gb * 1.05, std::numeric_limits<double>::infinity()};
  CHECK(make_individual(c, land, hw, 0.0).feasible);
  CHECK_FALSE(make_individual(c, land, hw, 0.1).feasible);
}

TEST_CASE("search accounting and determinism") {
  const auto land = SyntheticLandscape::generate(2, LandscapeProfile::Default);
  const auto space = ConfigSpace::full();
  const HardwareSpec hw{"cap", 30.0, std::numeric_limits<double>::infinity()};
  auto p = small_search(9);
  const auto a = run_search(space, land, hw, p);
  p.exec = Exec::Parallel;
  const auto b = run_search(space, land, hw, p);
  CHECK(a.predictor_calls == a.init_attempts + 20u * 5u);
  CHECK(a.generations.size() == 6);
  REQUIRE(a.archive.size() == b.archive.size());
  for (std::size_t i = 0; i < a.archive.size(); ++i) CHECK(a.archive.entries()[i].config == b.archive.entries()[i].config);
  for (const auto& e : a.archive.entries()) {
    CHECK(e.measured);
    CHECK(is_feasible(e.perf, hw));
    CHECK(e.perf == land.evaluate(e.config));
  }
  for (std::size_t g = 1; g < a.generations.size(); ++g) CHECK(a.generations[g].generation == static_cast<int>(g));

  const auto log = generation_log(a);
  CHECK(log.size() == 7);
  std::ostringstream out;
  write_generation_log(out, a);
  const auto text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);

  const auto round = archive_from_json(archive_json(a.archive));
  REQUIRE(round.size() == a.archive.size());
  for (std::size_t i = 0; i < round.size(); ++i) {
    CHECK(round.entries()[i].config == a.archive.entries()[i].config);
    CHECK(round.entries()[i].perf == a.archive.entries()[i].perf);
  }
}

TEST_CASE("rank_population assigns ranks and crowding") {
  const auto land = SyntheticLandscape::generate(3, LandscapeProfile::Default);
  Rng rng(6);
  std::vector<Individual> pop;
  for (int i = 0; i < 40; ++i)
    pop.push_back(make_individual(sample_uniform(ConfigSpace::full(), rng), land, HardwareSpec{}, 0.0));
  const auto fronts = rank_population(pop);
  for (std::size_t r = 0; r < fronts.size(); ++r)
    for (std::size_t i : fronts[r]) CHECK(pop[i].front_rank == static_cast<int>(r));
  for (const auto& a : pop)
    for (const auto& b : pop)
      if (constrained_dominates(a, b)) CHECK(a.front_rank < b.front_rank);
}
