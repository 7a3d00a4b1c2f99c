// SPDX-License-Identifier: Apache-2.0
#include "effsearch/refinement.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "effsearch/predictor.hpp"

namespace effsearch {

void validate(const RefinementParams& p) {
  if (p.initial_sample_size < 10) throw std::invalid_argument("initial sample size must be >= 10");
  if (p.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (p.evaluations_per_iteration < 1) throw std::invalid_argument("evaluations per iteration must be >= 1");
  if (p.ensemble_size < 2) throw std::invalid_argument("ensemble size must be >= 2");
  if (!(p.refit_growth >= 0.0)) throw std::invalid_argument("refit growth must be >= 0");
  if (p.warm_extra_trees < 1) throw std::invalid_argument("warm-start tree count must be >= 1");
  if (!is_valid(p.reporting_weights)) throw std::invalid_argument("invalid reporting weights");
  validate(p.search);
  validate(p.boosting);
}

std::optional<PerformanceVector> RefinementTrace::measured(const EfficiencyConfig& c) const {
  for (const auto& r : evaluations)
    if (r.config == c) return r.perf;
  return std::nullopt;
}

std::optional<double> RefinementTrace::best_utility(int r) const {
  if (r == 0) return initial.best_utility;
  if (r < 0 || static_cast<std::size_t>(r) > iterations.size()) throw std::out_of_range("no such iteration");
  return iterations[static_cast<std::size_t>(r) - 1].best_utility;
}

std::vector<double> uncertainty_scores(std::span<const ObjectivePrediction> predictions,
                                       std::span<const PerformanceVector> archive) {
  std::array<double, 4> range{};
  for (Metric m : kMetrics) {
    if (archive.empty()) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : archive) {
      lo = std::min(lo, p.get(m));
      hi = std::max(hi, p.get(m));
    }
    range[static_cast<std::size_t>(m)] = hi - lo;
  }
  std::vector<double> out;
  out.reserve(predictions.size());
  for (const auto& pred : predictions) {
    double s = 0.0;
    for (std::size_t o = 0; o < 4; ++o)
      if (range[o] > 0.0) s += pred[o].var / (range[o] * range[o]);
    out.push_back(s);
  }
  return out;
}

std::vector<EfficiencyConfig> select_topk_uncertain(const ParetoArchive& archive,
                                                    const SurrogateEnsemble& ensemble,
                                                    const ModelDescriptor& model, const TaskDescriptor& task,
                                                    const std::set<EfficiencyConfig>& already_measured,
                                                    std::size_t k) {
  const auto& entries = archive.entries();
  std::vector<FeatureVector> features;
  features.reserve(entries.size());
  for (const auto& e : entries) features.push_back(encode(e.config, model, task));
  const auto predictions = ensemble.predict_mean_var_batch(features);
  const auto scores = uncertainty_scores(predictions, archive.performances());

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (!already_measured.contains(entries[i].config)) candidates.push_back(i);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (candidates.size() > k) candidates.resize(k);
  std::vector<EfficiencyConfig> out;
  out.reserve(candidates.size());
  for (std::size_t i : candidates) out.push_back(entries[i].config);
  return out;
}

ParetoArchive final_validate(const ParetoArchive& archive, const Evaluator& evaluator, const HardwareSpec& hw,
                             const WarningSink& warn) {
  ParetoArchive out(archive.capacity());
  for (const auto& e : archive.entries()) {
    PerformanceVector perf = e.perf;
    if (!e.measured) {
      try {
        perf = evaluator.evaluate(e.config);
      } catch (const EvaluationError& err) {
        if (warn) warn("skipping " + to_canonical(e.config) + ": " + err.what());
        continue;
      }
    }
    if (!is_feasible(perf, hw)) continue;
    out.insert(ArchiveEntry{e.config, perf, true, true});
  }
  return out;
}

std::optional<double> best_measured_utility(const std::vector<MeasuredRecord>& records, const HardwareSpec& hw,
                                            const PreferenceWeights& w) {
  if (records.empty()) return std::nullopt;
  std::vector<PerformanceVector> all;
  all.reserve(records.size());
  for (const auto& r : records) all.push_back(r.perf);
  const auto ctx = NormalizationContext::from(all, "measured");
  std::optional<double> best;
  for (const auto& r : records) {
    if (!is_feasible(r.perf, hw)) continue;
    const double u = utility(r.perf, w, ctx);
    if (!best || u > *best) best = u;
  }
  return best;
}

std::vector<std::optional<double>> utility_trend(const RefinementTrace& t, const PreferenceWeights& w) {
  std::vector<std::optional<double>> out(t.iterations.size() + 1);
  if (t.evaluations.empty()) return out;
  std::vector<PerformanceVector> all;
  for (const auto& r : t.evaluations) all.push_back(r.perf);
  const auto ctx = NormalizationContext::from(all, "run");
  for (const auto& r : t.evaluations) {
    if (!is_feasible(r.perf, t.hardware)) continue;
    const double u = utility(r.perf, w, ctx);
    for (std::size_t k = static_cast<std::size_t>(std::max(r.iteration, 0)); k < out.size(); ++k)
      if (!out[k] || u > *out[k]) out[k] = u;
  }
  return out;
}

namespace {

ParetoArchive measured_archive(const std::vector<MeasuredRecord>& records, const HardwareSpec& hw) {
  ParetoArchive a;
  for (const auto& r : records)
    if (is_feasible(r.perf, hw)) a.insert(ArchiveEntry{r.config, r.perf, true, true});
  return a;
}

std::vector<EfficiencyConfig> initial_sample(const ConfigSpace& space, std::size_t n, std::uint64_t seed) {
  const EfficiencyConfig baseline = space.first();
  if (n >= space.size()) {
    auto all = enumerate(space);
    std::stable_partition(all.begin(), all.end(), [&](const EfficiencyConfig& c) { return c == baseline; });
    return all;
  }
  Rng rng(seed);
  std::vector<EfficiencyConfig> out{baseline};
  std::set<EfficiencyConfig> seen{baseline};
  while (out.size() < n) {
    auto c = sample_uniform(space, rng);
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

void close_iteration(IterationRecord& rec, const std::vector<MeasuredRecord>& records, const HardwareSpec& hw,
                     const PreferenceWeights& w) {
  rec.best_utility = best_measured_utility(records, hw, w);
  rec.archive = measured_archive(records, hw).entries();
}

}  // namespace

RefinementResult run_adaptive_optimization(const ConfigSpace& space, const Evaluator& evaluator,
                                           const HardwareSpec& hw, const ModelDescriptor& model,
                                           const TaskDescriptor& task, const RefinementParams& params) {
  validate(params);
  RefinementResult result;
  RefinementTrace& trace = result.trace;
  trace.space = space.name();
  trace.evaluator = evaluator.identity();
  trace.model = model;
  trace.task = task;
  trace.hardware = hw;
  trace.params = params;
  trace.baseline = space.first();

  auto measure = [&](const std::vector<EfficiencyConfig>& configs, int iteration) {
    std::vector<PerformanceVector> perf;
    try {
      perf = evaluate_all(configs, evaluator, params.exec);
    } catch (const EvaluationError& e) {
      throw RefinementError(std::string("evaluation failed in iteration ") + std::to_string(iteration) + ": " +
                                e.what(),
                            trace);
    }
    for (std::size_t i = 0; i < configs.size(); ++i) trace.evaluations.push_back({configs[i], perf[i], iteration});
    return perf;
  };

  const auto sample = initial_sample(space, static_cast<std::size_t>(params.initial_sample_size),
                                     derive_seed(params.seed, 2));
  const auto sample_perf = measure(sample, 0);
  std::vector<TrainingSample> training = make_samples(sample, sample_perf, model, task);
  std::set<EfficiencyConfig> measured(sample.begin(), sample.end());

  result.ensemble = fit_ensemble(training, static_cast<std::size_t>(params.ensemble_size), params.boosting,
                                 derive_seed(params.seed, 1), params.exec);
  std::size_t last_fit_size = training.size();
  trace.initial.iteration = 0;
  trace.initial.update = "refit";
  trace.initial.training_size = training.size();
  close_iteration(trace.initial, trace.evaluations, hw, params.reporting_weights);

  for (int r = 1; r <= params.iterations; ++r) {
    IterationRecord rec;
    rec.iteration = r;
    SearchParams sp = params.search;
    sp.seed = derive_seed(params.seed, 1000 + static_cast<std::uint64_t>(r));
    const SurrogatePredictor predictor(result.ensemble, model, task, params.exec);
    const auto search = run_search(space, predictor, hw, sp);
    rec.search_archive_size = search.archive.size();
    rec.predictor_calls = search.predictor_calls;

    const auto chosen = select_topk_uncertain(search.archive, result.ensemble, model, task, measured,
                                              static_cast<std::size_t>(params.evaluations_per_iteration));
    std::vector<FeatureVector> features;
    for (const auto& c : chosen) features.push_back(encode(c, model, task));
    const auto predictions = result.ensemble.predict_mean_var_batch(features);
    const auto scores = uncertainty_scores(predictions, search.archive.performances());

    const auto perf = measure(chosen, r);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto& p = predictions[i];
      rec.selected.push_back(
          {chosen[i], scores[i], clamp_prediction({p[0].mean, p[1].mean, p[2].mean, p[3].mean}), perf[i]});
      measured.insert(chosen[i]);
    }
    for (Metric m : kMetrics) {
      const auto o = static_cast<std::size_t>(m);
      std::vector<double> predicted;
      std::vector<double> actual;
      for (std::size_t i = 0; i < chosen.size(); ++i) {
        predicted.push_back(predictions[i][o].mean);
        actual.push_back(perf[i].get(m));
      }
      try {
        rec.holdout_r2[o] = r2(predicted, actual);
      } catch (const std::invalid_argument&) {
        rec.holdout_r2[o] = std::nullopt;
      }
    }

    const auto fresh = make_samples(chosen, perf, model, task);
    training.insert(training.end(), fresh.begin(), fresh.end());
    if (fresh.empty()) {
      rec.update = "none";
    } else if (static_cast<double>(training.size() - last_fit_size) >=
               params.refit_growth * static_cast<double>(last_fit_size)) {
      result.ensemble = fit_ensemble(training, static_cast<std::size_t>(params.ensemble_size), params.boosting,
                                     derive_seed(params.seed, 100 + static_cast<std::uint64_t>(r)), params.exec);
      last_fit_size = training.size();
      rec.update = "refit";
    } else {
      result.ensemble = warm_start(result.ensemble, fresh, params.warm_extra_trees,
                                   derive_seed(params.seed, 200 + static_cast<std::uint64_t>(r)), params.exec);
      rec.update = "warm_start";
    }
    rec.training_size = training.size();
    close_iteration(rec, trace.evaluations, hw, params.reporting_weights);
    trace.iterations.push_back(std::move(rec));
  }

  trace.final_archive = measured_archive(trace.evaluations, hw);
  result.archive = trace.final_archive;
  return result;
}

// ---------------------------------------------------------------------------
// Trace files

namespace {

Json entry_json(const ArchiveEntry& e) {
  return Json{{"config", to_canonical(e.config)},
              {"performance", e.perf},
              {"feasible", e.feasible},
              {"source", e.measured ? "measured" : "predicted"}};
}

ArchiveEntry entry_from_json(const Json& j) {
  return ArchiveEntry{parse_canonical(j.at("config").get<std::string>()), j.at("performance").get<PerformanceVector>(),
                      j.at("feasible").get<bool>(), j.at("source").get<std::string>() == "measured"};
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

Json iteration_json(const IterationRecord& r) {
  Json selected = Json::array();
  for (const auto& s : r.selected)
    selected.push_back({{"config", to_canonical(s.config)},
                        {"uncertainty", s.uncertainty},
                        {"predicted", s.predicted},
                        {"measured", s.measured}});
  Json r2 = Json::object();
  for (Metric m : kMetrics) r2[std::string(metric_field(m))] = optional_json(r.holdout_r2[static_cast<std::size_t>(m)]);
  Json archive = Json::array();
  for (const auto& e : r.archive) archive.push_back(entry_json(e));
  return Json{{"iteration", r.iteration},
              {"search_archive_size", r.search_archive_size},
              {"predictor_calls", r.predictor_calls},
              {"selected", selected},
              {"holdout_r2", r2},
              {"update", r.update},
              {"training_size", r.training_size},
              {"best_utility", optional_json(r.best_utility)},
              {"archive", archive}};
}

IterationRecord iteration_from_json(const Json& j) {
  IterationRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.search_archive_size = j.at("search_archive_size").get<std::size_t>();
  r.predictor_calls = j.at("predictor_calls").get<std::size_t>();
  for (const auto& s : j.at("selected"))
    r.selected.push_back({parse_canonical(s.at("config").get<std::string>()), s.at("uncertainty").get<double>(),
                          s.at("predicted").get<PerformanceVector>(), s.at("measured").get<PerformanceVector>()});
  for (Metric m : kMetrics)
    r.holdout_r2[static_cast<std::size_t>(m)] = optional_from_json(j.at("holdout_r2").at(std::string(metric_field(m))));
  r.update = j.at("update").get<std::string>();
  r.training_size = j.at("training_size").get<std::size_t>();
  r.best_utility = optional_from_json(j.at("best_utility"));
  for (const auto& e : j.at("archive")) r.archive.push_back(entry_from_json(e));
  return r;
}

Json params_json(const RefinementParams& p) {
  const auto& s = p.search;
  const auto& b = p.boosting;
  return Json{{"initial_sample_size", p.initial_sample_size},
              {"iterations", p.iterations},
              {"evaluations_per_iteration", p.evaluations_per_iteration},
              {"ensemble_size", p.ensemble_size},
              {"seed", p.seed},
              {"refit_growth", p.refit_growth},
              {"warm_extra_trees", p.warm_extra_trees},
              {"reporting_weights", p.reporting_weights},
              {"search",
               {{"population_size", s.population_size},
                {"generations", s.generations},
                {"crossover_probability", s.crossover_probability},
                {"mutation", {{"arch", s.mutation.arch}, {"ft", s.mutation.ft}, {"inf", s.mutation.inf}}},
                {"tournament_size", s.tournament_size},
                {"init_attempts_factor", s.init_attempts_factor},
                {"constraint_margin", s.constraint_margin},
                {"archive_capacity", s.archive_capacity ? Json(*s.archive_capacity) : Json(nullptr)}}},
              {"boosting",
               {{"n_estimators", b.n_estimators},
                {"max_depth", b.max_depth},
                {"learning_rate", b.learning_rate},
                {"subsample", b.subsample},
                {"colsample", b.colsample},
                {"min_samples_leaf", b.min_samples_leaf}}}};
}

RefinementParams params_from_json(const Json& j) {
  RefinementParams p;
  p.initial_sample_size = j.at("initial_sample_size").get<int>();
  p.iterations = j.at("iterations").get<int>();
  p.evaluations_per_iteration = j.at("evaluations_per_iteration").get<int>();
  p.ensemble_size = j.at("ensemble_size").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.refit_growth = j.at("refit_growth").get<double>();
  p.warm_extra_trees = j.at("warm_extra_trees").get<int>();
  p.reporting_weights = j.at("reporting_weights").get<PreferenceWeights>();
  const auto& s = j.at("search");
  p.search.population_size = s.at("population_size").get<int>();
  p.search.generations = s.at("generations").get<int>();
  p.search.crossover_probability = s.at("crossover_probability").get<double>();
  p.search.mutation = {s.at("mutation").at("arch").get<double>(), s.at("mutation").at("ft").get<double>(),
                       s.at("mutation").at("inf").get<double>()};
  p.search.tournament_size = s.at("tournament_size").get<int>();
  p.search.init_attempts_factor = s.at("init_attempts_factor").get<int>();
  p.search.constraint_margin = s.at("constraint_margin").get<double>();
  if (!s.at("archive_capacity").is_null()) p.search.archive_capacity = s.at("archive_capacity").get<std::size_t>();
  const auto& b = j.at("boosting");
  p.boosting.n_estimators = b.at("n_estimators").get<int>();
  p.boosting.max_depth = b.at("max_depth").get<int>();
  p.boosting.learning_rate = b.at("learning_rate").get<double>();
  p.boosting.subsample = b.at("subsample").get<double>();
  p.boosting.colsample = b.at("colsample").get<double>();
  p.boosting.min_samples_leaf = b.at("min_samples_leaf").get<int>();
  return p;
}

}  // namespace

Json trace_json(const RefinementTrace& t) {
  Json evaluations = Json::array();
  for (const auto& r : t.evaluations)
    evaluations.push_back({{"config", to_canonical(r.config)}, {"performance", r.perf}, {"iteration", r.iteration}});
  Json iterations = Json::array();
  for (const auto& r : t.iterations) iterations.push_back(iteration_json(r));
  Json archive = Json::array();
  for (const auto& e : t.final_archive.entries()) archive.push_back(entry_json(e));
  Json header{{"format", "effsearch-trace"},
              {"version", 1},
              {"space", t.space},
              {"evaluator", t.evaluator},
              {"model", t.model},
              {"task", t.task},
              {"hardware", t.hardware},
              {"params", params_json(t.params)},
              {"baseline", to_canonical(t.baseline)},
              {"true_evaluations", t.true_evaluations()}};
  return Json{{"header", header},
              {"initial_sample", iteration_json(t.initial)},
              {"iterations", iterations},
              {"final_archive", archive},
              {"evaluations", evaluations}};
}

namespace {

RefinementTrace parse_trace(const Json& j) {
  const auto& h = j.at("header");
  if (h.at("format").get<std::string>() != "effsearch-trace") throw std::runtime_error("not a trace document");
  if (h.at("version").get<int>() != 1) throw std::runtime_error("unsupported trace version");
  RefinementTrace t;
  t.space = h.at("space").get<std::string>();
  t.evaluator = h.at("evaluator").get<std::string>();
  t.model = h.at("model").get<ModelDescriptor>();
  t.task = h.at("task").get<TaskDescriptor>();
  t.hardware = h.at("hardware").get<HardwareSpec>();
  t.params = params_from_json(h.at("params"));
  t.baseline = parse_canonical(h.at("baseline").get<std::string>());
  t.initial = iteration_from_json(j.at("initial_sample"));
  for (const auto& r : j.at("iterations")) t.iterations.push_back(iteration_from_json(r));
  for (const auto& r : j.at("evaluations"))
    t.evaluations.push_back({parse_canonical(r.at("config").get<std::string>()),
                             r.at("performance").get<PerformanceVector>(), r.at("iteration").get<int>()});
  for (const auto& e : j.at("final_archive")) t.final_archive.insert(entry_from_json(e));
  if (h.at("true_evaluations").get<std::size_t>() != t.evaluations.size())
    throw std::runtime_error("trace evaluation count does not match its records");
  return t;
}

}  // namespace

RefinementTrace trace_from_json(const Json& j) {
  try {
    return parse_trace(j);
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("malformed trace: ") + e.what());
  }
}

void write_trace(std::ostream& out, const RefinementTrace& t) { out << trace_json(t).dump(1) << '\n'; }

RefinementTrace read_trace(const std::string& path) { return trace_from_json(read_json_file(path)); }

}  // namespace effsearch
