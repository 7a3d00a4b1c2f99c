// SPDX-License-Identifier: Apache-2.0
#include "effsearch/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace effsearch {

double MutationRates::get(Stage s) const {
  switch (s) {
    case Stage::Arch: return arch;
    case Stage::FineTune: return ft;
    case Stage::Inference: return inf;
  }
  return 0.0;
}

void validate(const SearchParams& p) {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (p.population_size < 4 || p.population_size % 2 != 0)
    throw std::invalid_argument("population size must be even and >= 4");
  if (p.generations < 1) throw std::invalid_argument("generations must be >= 1");
  if (!prob(p.crossover_probability)) throw std::invalid_argument("crossover probability must lie in [0, 1]");
  if (!prob(p.mutation.arch) || !prob(p.mutation.ft) || !prob(p.mutation.inf))
    throw std::invalid_argument("mutation rates must lie in [0, 1]");
  if (p.tournament_size < 1) throw std::invalid_argument("tournament size must be >= 1");
  if (p.init_attempts_factor < 1) throw std::invalid_argument("init attempts factor must be >= 1");
  if (!(p.constraint_margin >= 0.0)) throw std::invalid_argument("constraint margin must be >= 0");
  if (p.archive_capacity && *p.archive_capacity == 0) throw std::invalid_argument("archive capacity must be >= 1");
}

bool constrained_dominates(const Individual& a, const Individual& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible) return a.violation < b.violation;
  return dominates(a.objectives, b.objectives);
}

Fronts rank_population(std::vector<Individual>& pop, Exec exec) {
  auto fronts = fast_nondominated_sort(
      pop.size(), [&](std::size_t a, std::size_t b) { return constrained_dominates(pop[a], pop[b]); }, exec);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    std::vector<PerformanceVector> perf;
    std::vector<EfficiencyConfig> configs;
    for (std::size_t i : fronts[r]) {
      perf.push_back(pop[i].objectives);
      configs.push_back(pop[i].config);
    }
    const auto d = crowding_distance(perf, configs);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      pop[fronts[r][k]].front_rank = static_cast<int>(r);
      pop[fronts[r][k]].crowding = d[k];
    }
  }
  return fronts;
}

namespace {

Individual score(const EfficiencyConfig& c, const PerformanceVector& perf, const HardwareSpec& hw, double margin) {
  Individual ind;
  ind.config = c;
  ind.objectives = perf;
  PerformanceVector padded = ind.objectives;
  padded.memory_gb *= 1.0 + margin;
  padded.energy_j *= 1.0 + margin;
  ind.feasible = is_feasible(padded, hw);
  ind.violation = constraint_violation(padded, hw);
  return ind;
}

}  // namespace

Individual make_individual(const EfficiencyConfig& c, const Evaluator& predictor, const HardwareSpec& hw,
                           double margin) {
  return score(c, predictor.evaluate(c), hw, margin);
}

InitResult constraint_aware_init(const ConfigSpace& space, const Evaluator& predictor, const HardwareSpec& hw,
                                 const SearchParams& params, Rng& rng) {
  const auto n = static_cast<std::size_t>(params.population_size);
  const std::size_t budget = n * static_cast<std::size_t>(params.init_attempts_factor);
  InitResult out;
  std::vector<Individual> rejected;
  while (out.population.size() < n && out.attempts < budget) {
    Individual ind = make_individual(sample_uniform(space, rng), predictor, hw, params.constraint_margin);
    ++out.attempts;
    if (ind.feasible)
      out.population.push_back(std::move(ind));
    else
      rejected.push_back(std::move(ind));
  }
  if (out.population.size() < n) {
    std::stable_sort(rejected.begin(), rejected.end(), [](const Individual& a, const Individual& b) {
      if (a.violation != b.violation) return a.violation < b.violation;
      return a.config < b.config;
    });
    out.infeasible_members = n - out.population.size();
    for (std::size_t i = 0; i < out.infeasible_members; ++i) out.population.push_back(rejected[i]);
  }
  return out;
}

namespace {

template <typename T>
void coin_swap(T& a, T& b, Rng& rng) {
  if (rng.bernoulli(0.5)) std::swap(a, b);
}

}  // namespace

std::pair<EfficiencyConfig, EfficiencyConfig> hierarchical_crossover(const EfficiencyConfig& p1,
                                                                     const EfficiencyConfig& p2,
                                                                     double probability, Rng& rng) {
  EfficiencyConfig c1 = p1;
  EfficiencyConfig c2 = p2;
  if (!rng.bernoulli(probability)) return {c1, c2};

  coin_swap(c1.arch.attention, c2.arch.attention, rng);
  if (p1.arch.moe.sparse && p2.arch.moe.sparse) {
    coin_swap(c1.arch.moe.sparse->num_experts, c2.arch.moe.sparse->num_experts, rng);
    coin_swap(c1.arch.moe.sparse->routing_top_k, c2.arch.moe.sparse->routing_top_k, rng);
  } else if (p1.arch.moe.is_dense() != p2.arch.moe.is_dense()) {
    coin_swap(c1.arch.moe, c2.arch.moe, rng);
  }

  if (p1.ft.peft && p2.ft.peft) {
    coin_swap(c1.ft.peft->method, c2.ft.peft->method, rng);
    coin_swap(c1.ft.peft->rank, c2.ft.peft->rank, rng);
    coin_swap(c1.ft.peft->alpha_multiplier, c2.ft.peft->alpha_multiplier, rng);
  } else if (p1.ft.is_full() != p2.ft.is_full()) {
    coin_swap(c1.ft, c2.ft, rng);
  }

  if (p1.inf.quant.quantized && p2.inf.quant.quantized) {
    coin_swap(c1.inf.quant.quantized->precision, c2.inf.quant.quantized->precision, rng);
    coin_swap(c1.inf.quant.quantized->method, c2.inf.quant.quantized->method, rng);
  } else if (p1.inf.quant.is_fp16() != p2.inf.quant.is_fp16()) {
    coin_swap(c1.inf.quant, c2.inf.quant, rng);
  }
  coin_swap(c1.inf.kv_cache, c2.inf.kv_cache, rng);
  return {c1, c2};
}

EfficiencyConfig stage_mutate(const EfficiencyConfig& c, const MutationRates& rates, const ConfigSpace& space,
                              Rng& rng) {
  EfficiencyConfig out = c;
  for (Stage s : kStages)
    if (rng.bernoulli(rates.get(s))) out = mutate_field(out, s, space, rng);
  return out;
}

namespace {

bool better(const Individual& a, const Individual& b) {
  if (a.front_rank != b.front_rank) return a.front_rank < b.front_rank;
  if (a.crowding != b.crowding) return a.crowding > b.crowding;
  return a.config < b.config;
}

}  // namespace

std::size_t tournament_select(std::span<const Individual> pop, int k, Rng& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament on an empty population");
  std::size_t best = rng.uniform_index(pop.size());
  for (int i = 1; i < k; ++i) {
    const std::size_t c = rng.uniform_index(pop.size());
    if (better(pop[c], pop[best])) best = c;
  }
  return best;
}

namespace {

void update_archive(ParetoArchive& archive, const std::vector<Individual>& pop, const Fronts& fronts,
                    bool measured) {
  if (fronts.empty()) return;
  for (std::size_t i : fronts[0])
    if (pop[i].feasible) archive.insert(ArchiveEntry{pop[i].config, pop[i].objectives, true, measured});
}

}  // namespace

SearchResult run_search(const ConfigSpace& space, const Evaluator& predictor, const HardwareSpec& hw,
                        const SearchParams& params) {
  validate(params);
  const auto n = static_cast<std::size_t>(params.population_size);
  const CountingEvaluator counted(predictor);
  const bool measured = !predictor.is_prediction();
  Rng rng(derive_seed(params.seed, 0x5ea4c8));

  SearchResult out;
  out.archive = ParetoArchive(params.archive_capacity);
  auto init = constraint_aware_init(space, counted, hw, params, rng);
  out.init_attempts = init.attempts;
  out.infeasible_init = init.infeasible_members;
  std::vector<Individual> pop = std::move(init.population);
  for (const auto& ind : pop)
    if (ind.feasible) out.evaluated_feasible.push_back(ind.objectives);
  auto fronts = rank_population(pop);
  update_archive(out.archive, pop, fronts, measured);
  out.generations.push_back({0, out.archive.size(), out.archive.performances()});

  for (int g = 1; g <= params.generations; ++g) {
    std::vector<EfficiencyConfig> children;
    children.reserve(n);
    while (children.size() < n) {
      const auto& a = pop[tournament_select(pop, params.tournament_size, rng)];
      const auto& b = pop[tournament_select(pop, params.tournament_size, rng)];
      auto [c1, c2] = hierarchical_crossover(a.config, b.config, params.crossover_probability, rng);
      children.push_back(stage_mutate(c1, params.mutation, space, rng));
      children.push_back(stage_mutate(c2, params.mutation, space, rng));
    }
    std::vector<PerformanceVector> perf;
    if (params.exec == Exec::Serial || predictor.is_prediction()) {
      perf = counted.evaluate_batch(children);
    } else {
      perf = kernels::map_index<PerformanceVector>(n, params.exec,
                                                   [&](std::size_t i) { return counted.evaluate(children[i]); });
    }
    std::vector<Individual> offspring;
    offspring.reserve(n);
    for (std::size_t i = 0; i < n; ++i) offspring.push_back(score(children[i], perf[i], hw, params.constraint_margin));
    for (const auto& ind : offspring)
      if (ind.feasible) out.evaluated_feasible.push_back(ind.objectives);

    std::vector<Individual> combined = std::move(pop);
    combined.insert(combined.end(), offspring.begin(), offspring.end());
    fronts = rank_population(combined);
    update_archive(out.archive, combined, fronts, measured);

    std::vector<Individual> next;
    next.reserve(n);
    for (const auto& front : fronts) {
      if (next.size() + front.size() <= n) {
        for (std::size_t i : front) next.push_back(combined[i]);
        if (next.size() == n) break;
        continue;
      }
      std::vector<std::size_t> order = front;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return better(combined[a], combined[b]); });
      for (std::size_t k = 0; next.size() < n; ++k) next.push_back(combined[order[k]]);
      break;
    }
    pop = std::move(next);
    out.generations.push_back({g, out.archive.size(), out.archive.performances()});
  }
  out.population = std::move(pop);
  out.predictor_calls = counted.calls();
  return out;
}

std::vector<Json> generation_log(const SearchResult& result) {
  std::vector<Json> lines;
  const auto& pool = result.evaluated_feasible;
  Json header{{"type", "header"},
              {"generations", result.generations.empty() ? 0 : result.generations.back().generation},
              {"predictor_calls", result.predictor_calls},
              {"init_attempts", result.init_attempts},
              {"infeasible_init", result.infeasible_init},
              {"reference_set", "predicted-feasible individuals of the run"}};
  if (pool.empty()) {
    header["reference_point"] = nullptr;
  } else {
    const auto ref = reference_point(pool);
    header["reference_point"] = {{"neg_accuracy_pct", ref[0]}, {"latency_ms", ref[1]}, {"memory_gb", ref[2]},
                                 {"energy_j", ref[3]}};
  }
  lines.push_back(header);
  const auto ctx = pool.empty() ? NormalizationContext{} : NormalizationContext::from(pool, "search");
  for (const auto& g : result.generations) {
    Json best = Json::object();
    for (const auto& preset : weight_presets()) {
      if (g.archive.empty()) {
        best[std::string(preset.name)] = nullptr;
        continue;
      }
      double u = -std::numeric_limits<double>::infinity();
      for (const auto& p : g.archive) u = std::max(u, utility(p, preset.weights, ctx));
      best[std::string(preset.name)] = u;
    }
    Json rec{{"type", "generation"}, {"generation", g.generation}, {"archive_size", g.archive_size},
             {"best_utility", best}};
    rec["hypervolume"] = pool.empty() ? Json(nullptr) : Json(hypervolume(g.archive, reference_point(pool)));
    lines.push_back(std::move(rec));
  }
  return lines;
}

void write_generation_log(std::ostream& out, const SearchResult& result) {
  for (const auto& line : generation_log(result)) out << line.dump() << '\n';
}

Json archive_json(const ParetoArchive& archive) {
  Json out = Json::array();
  for (const auto& e : archive.entries())
    out.push_back({{"config", to_canonical(e.config)},
                   {"structured", e.config},
                   {"performance", e.perf},
                   {"feasible", e.feasible},
                   {"source", e.measured ? "measured" : "predicted"}});
  return out;
}

ParetoArchive archive_from_json(const Json& j) {
  ParetoArchive a;
  for (const auto& e : j) {
    ArchiveEntry entry{parse_canonical(e.at("config").get<std::string>()), e.at("performance").get<PerformanceVector>(),
                       e.at("feasible").get<bool>(), e.at("source").get<std::string>() == "measured"};
    a.insert(entry);
  }
  return a;
}

}  // namespace effsearch
