// SPDX-License-Identifier: Apache-2.0
#include "effsearch/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "effsearch/landscape.hpp"
#include "effsearch/nsga2.hpp"
#include "effsearch/predictor.hpp"
#include "effsearch/presets.hpp"
#include "effsearch/refinement.hpp"
#include "effsearch/replay.hpp"
#include "effsearch/sensitivity.hpp"
#include "effsearch/service.hpp"

namespace effsearch::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string space = "full";
  std::string landscape = "default";
  std::uint64_t landscape_seed = 0;
  bool no_interactions = false;
  std::string replay;
  std::string hw_name = "unconstrained";
  double hw_mem = kInf;
  double hw_power = kInf;

  std::string model = "llama-2-7b";
  double model_params = 7e9;
  std::string model_family = "llama";
  std::string task = "generation";
  std::string task_domain = "generation";
  double difficulty = 0.5;
  int seq_len = 512;

  std::uint64_t seed = 0;
  SearchParams search;
  BoostingParams boosting;
  int ensemble = 5;
  bool parallel = false;

  int n0 = 200;
  int iters = 3;
  int k = 20;
  double w_acc = 1.0, w_lat = 1.0, w_mem = 1.0, w_energy = 1.0;

  std::string out;
  std::string manifest;
  bool direct = false;
  bool validate_archive = false;
  std::string trace;
  std::string config;
  std::string baseline;
  std::string format = "text";
  std::string action;
};

void add_evaluator_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--space", o.space, "Configuration space preset")->capture_default_str();
  cmd->add_option("--landscape", o.landscape, "Synthetic landscape profile")->capture_default_str();
  cmd->add_option("--landscape-seed", o.landscape_seed, "Synthetic landscape seed")->capture_default_str();
  cmd->add_flag("--no-interactions", o.no_interactions, "Disable cross-stage interaction terms");
  cmd->add_option("--replay", o.replay, "Replay measurements from a CSV file instead of a landscape");
  cmd->add_option("--hw-name", o.hw_name, "Hardware key")->capture_default_str();
  cmd->add_option("--hw-mem", o.hw_mem, "Memory cap in GB");
  cmd->add_option("--hw-power", o.hw_power, "Power cap in W");
  cmd->add_option("--model", o.model, "Model name")->capture_default_str();
  cmd->add_option("--model-params", o.model_params, "Model parameter count")->capture_default_str();
  cmd->add_option("--model-family", o.model_family, "Model family")->capture_default_str();
  cmd->add_option("--task", o.task, "Task name")->capture_default_str();
  cmd->add_option("--task-domain", o.task_domain, "Task domain")->capture_default_str();
  cmd->add_option("--difficulty", o.difficulty, "Task difficulty in [0, 1]")->capture_default_str();
  cmd->add_option("--seq-len", o.seq_len, "Sequence length")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Run seed")->capture_default_str();
  cmd->add_flag("--parallel", o.parallel, "Use OpenMP kernels");
}

void add_search_flags(CLI::App* cmd, Options& o) {
  auto& s = o.search;
  cmd->add_option("--pop", s.population_size, "Population size")->capture_default_str();
  cmd->add_option("--gens", s.generations, "Generations")->capture_default_str();
  cmd->add_option("--crossover", s.crossover_probability, "Crossover probability")->capture_default_str();
  cmd->add_option("--tournament", s.tournament_size, "Tournament size")->capture_default_str();
  cmd->add_option("--mut-arch", s.mutation.arch, "Architecture mutation rate")->capture_default_str();
  cmd->add_option("--mut-ft", s.mutation.ft, "Fine-tuning mutation rate")->capture_default_str();
  cmd->add_option("--mut-inf", s.mutation.inf, "Inference mutation rate")->capture_default_str();
  cmd->add_option("--init-factor", s.init_attempts_factor, "Initializer attempts per slot")->capture_default_str();
  cmd->add_option("--margin", s.constraint_margin, "Relative margin on predicted memory and power")
      ->capture_default_str();
  auto& b = o.boosting;
  cmd->add_option("--trees", b.n_estimators, "Trees per boosted model")->capture_default_str();
  cmd->add_option("--depth", b.max_depth, "Maximum tree depth")->capture_default_str();
  cmd->add_option("--lr", b.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--subsample", b.subsample, "Row subsample fraction")->capture_default_str();
  cmd->add_option("--colsample", b.colsample, "Feature subsample fraction")->capture_default_str();
  cmd->add_option("--ensemble", o.ensemble, "Ensemble size")->capture_default_str();
  cmd->add_option("--n0", o.n0, "Initial sample size")->capture_default_str();
}

void add_weight_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--w-acc", o.w_acc, "Accuracy weight")->capture_default_str();
  cmd->add_option("--w-lat", o.w_lat, "Latency weight")->capture_default_str();
  cmd->add_option("--w-mem", o.w_mem, "Memory weight")->capture_default_str();
  cmd->add_option("--w-energy", o.w_energy, "Energy weight")->capture_default_str();
}

PreferenceWeights weights(const Options& o) {
  const PreferenceWeights w{o.w_acc, o.w_lat, o.w_mem, o.w_energy};
  if (!is_valid(w)) throw UsageError("weights must be nonnegative with at least one positive");
  return w;
}

HardwareSpec hardware(const Options& o) {
  if (!(o.hw_mem > 0.0) || !(o.hw_power > 0.0)) throw UsageError("hardware caps must be positive");
  return HardwareSpec{o.hw_name, o.hw_mem, o.hw_power};
}

ModelDescriptor model(const Options& o) {
  ModelDescriptor m;
  m.name = o.model;
  m.param_count = o.model_params;
  m.family = o.model_family;
  validate(m);
  return m;
}

TaskDescriptor task(const Options& o) {
  TaskDescriptor t;
  t.name = o.task;
  t.domain = parse_task_domain(o.task_domain);
  t.difficulty = o.difficulty;
  t.sequence_length = o.seq_len;
  validate(t);
  return t;
}

struct ResolvedEvaluator {
  std::unique_ptr<Evaluator> evaluator;
  std::shared_ptr<const ReplayDataset> data;
};

ResolvedEvaluator resolve_evaluator(const Options& o, const ModelDescriptor& m, const TaskDescriptor& t) {
  ResolvedEvaluator r;
  if (!o.replay.empty()) {
    r.data = std::make_shared<const ReplayDataset>(ReplayDataset::load(o.replay));
    r.evaluator = std::make_unique<ReplayEvaluator>(r.data, m.name, t.name, o.hw_name,
                                                    std::filesystem::path(o.replay).filename().string());
    return r;
  }
  auto land = SyntheticLandscape::generate(o.landscape_seed, parse_landscape_profile(o.landscape), m, t);
  if (o.no_interactions) land = land.without_interactions();
  r.evaluator = std::make_unique<SyntheticLandscape>(std::move(land));
  return r;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_manifest(const std::string& path, const std::string& command, const std::vector<std::string>& args,
                    const CLI::App& app, const Options& o, const std::string& evaluator,
                    const std::vector<std::string>& outputs) {
  Json doc{{"tool", "effsearch"},
           {"version", kToolVersion},
           {"command", command},
           {"argv", args},
           {"resolved", app.config_to_str(true, false)},
           {"seed", o.seed},
           {"space", o.space},
           {"evaluator", evaluator},
           {"outputs", outputs},
           {"created_at", timestamp()}};
  write_json_file(path, doc);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

RefinementParams refinement_params(const Options& o) {
  RefinementParams p;
  p.initial_sample_size = o.n0;
  p.iterations = o.iters;
  p.evaluations_per_iteration = o.k;
  p.search = o.search;
  p.boosting = o.boosting;
  p.ensemble_size = o.ensemble;
  p.seed = o.seed;
  p.reporting_weights = weights(o);
  p.exec = o.parallel ? Exec::Parallel : Exec::Serial;
  p.search.exec = p.exec;
  return p;
}

void validate_or_usage(const RefinementParams& p) {
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------

int cmd_space(const Options& o, std::ostream& out) {
  const auto space = ConfigSpace::named(o.space);
  if (o.action == "count") {
    out << "arch=" << space.arch_count() << " ft=" << space.ft_count() << " inf=" << space.inf_count()
        << " total=" << space.size() << '\n';
  } else {
    for (const auto& c : enumerate(space)) out << to_canonical(c) << '\n';
  }
  return kExitOk;
}

int cmd_search(const Options& o, const std::vector<std::string>& args, const CLI::App& app, std::ostream& out) {
  const auto space = ConfigSpace::named(o.space);
  const auto hw = hardware(o);
  const auto m = model(o);
  const auto t = task(o);
  auto params = refinement_params(o);
  params.iterations = 0;
  params.search.seed = derive_seed(o.seed, 7);
  validate_or_usage(params);
  const auto ev = resolve_evaluator(o, m, t);

  const std::filesystem::path dir(o.out.empty() ? "search-out" : o.out);
  std::filesystem::create_directories(dir);
  const auto archive_path = (dir / "archive.json").string();
  const auto log_path = (dir / "generations.jsonl").string();
  write_manifest((dir / "manifest.json").string(), "search", args, app, o, ev.evaluator->identity(),
                 {archive_path, log_path});

  SearchResult result;
  std::size_t true_evaluations = 0;
  if (o.direct) {
    const CountingEvaluator counted(*ev.evaluator);
    result = run_search(space, counted, hw, params.search);
    true_evaluations = counted.calls();
  } else {
    const CountingEvaluator counted(*ev.evaluator);
    const auto fit = run_adaptive_optimization(space, counted, hw, m, t, params);
    const SurrogatePredictor predictor(fit.ensemble, m, t, params.exec);
    result = run_search(space, predictor, hw, params.search);
    if (o.validate_archive) result.archive = final_validate(result.archive, counted, hw);
    true_evaluations = counted.calls();
  }
  write_json_file(archive_path, archive_json(result.archive));
  std::ostringstream log;
  write_generation_log(log, result);
  write_text(log_path, log.str());
  out << "archive=" << result.archive.size() << " predictor_calls=" << result.predictor_calls
      << " true_evaluations=" << true_evaluations << '\n';
  if (result.archive.empty()) {
    out << "no feasible configuration found\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_refine(const Options& o, const std::vector<std::string>& args, const CLI::App& app, std::ostream& out) {
  const auto space = ConfigSpace::named(o.space);
  const auto hw = hardware(o);
  const auto m = model(o);
  const auto t = task(o);
  const auto params = refinement_params(o);
  validate_or_usage(params);
  const auto ev = resolve_evaluator(o, m, t);

  const std::string trace_path = o.out.empty() ? "trace.json" : o.out;
  const std::string manifest_path = o.manifest.empty() ? trace_path + ".manifest.json" : o.manifest;
  write_manifest(manifest_path, "refine", args, app, o, ev.evaluator->identity(), {trace_path});

  const CountingEvaluator counted(*ev.evaluator);
  RefinementResult result;
  try {
    result = run_adaptive_optimization(space, counted, hw, m, t, params);
  } catch (const RefinementError& e) {
    std::ofstream partial(trace_path + ".partial", std::ios::binary);
    write_trace(partial, e.partial_trace());
    throw;
  }
  std::ostringstream text;
  write_trace(text, result.trace);
  write_text(trace_path, text.str());

  std::size_t selected = 0;
  for (const auto& it : result.trace.iterations) selected += it.selected.size();
  out << "true_evaluations=" << counted.calls() << " n0=" << result.trace.true_evaluations() - selected
      << " selected=" << selected << '\n';
  const auto trend = utility_trend(result.trace, params.reporting_weights);
  out << "best_utility";
  for (std::size_t r = 0; r < trend.size(); ++r)
    out << " r" << r << '=' << (trend[r] ? format_number(*trend[r]) : std::string("none"));
  out << '\n' << "archive=" << result.archive.size() << " trace=" << trace_path << '\n';
  if (result.archive.empty()) {
    out << "no feasible configuration found\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

void print_perf(std::ostream& out, const PerformanceVector& p) {
  out << "accuracy_pct=" << format_number(p.accuracy_pct) << " latency_ms=" << format_number(p.latency_ms)
      << " memory_gb=" << format_number(p.memory_gb) << " energy_j=" << format_number(p.energy_j);
}

int cmd_recommend(const Options& o, std::ostream& out) {
  const auto trace = read_trace(o.trace);
  const auto w = weights(o);
  HardwareSpec hw = trace.hardware;
  if (std::isfinite(o.hw_mem)) hw.memory_cap_gb = o.hw_mem;
  if (std::isfinite(o.hw_power)) hw.power_cap_w = o.hw_power;
  if (!(hw.memory_cap_gb > 0.0) || !(hw.power_cap_w > 0.0)) throw UsageError("hardware caps must be positive");
  const auto ctx = NormalizationContext::from(trace.final_archive.performances(), "archive");
  const auto best = recommend(trace.final_archive, w, hw, ctx);
  if (!best) throw InfeasibleError("no feasible configuration");
  if (o.format == "json") {
    out << Json{{"config", to_canonical(best->entry.config)},
                {"utility", best->utility},
                {"performance", best->entry.perf}}
               .dump(2)
        << '\n';
  } else {
    out << "config=" << to_canonical(best->entry.config) << '\n'
        << "utility=" << format_number(best->utility) << '\n';
    print_perf(out, best->entry.perf);
    out << '\n';
  }
  return kExitOk;
}

int cmd_sensitivity(const Options& o, std::ostream& out) {
  const auto run = publish(read_trace(o.trace), o.parallel ? Exec::Parallel : Exec::Serial);
  const auto config = parse_canonical(o.config);
  if (!validate(config, run->space)) throw std::runtime_error("configuration outside the run's space");
  const SurrogatePredictor predictor(run->ensemble, run->trace.model, run->trace.task);
  const auto rows = sensitivity(
      config, run->space, [&](const EfficiencyConfig& c) { return predictor.evaluate(c); },
      run->trace.params.reporting_weights, run->ranges, true);
  std::ostringstream text;
  if (o.format == "json")
    text << sensitivity_json(rows).dump(2) << '\n';
  else
    write_sensitivity_csv(text, rows);
  if (o.out.empty())
    out << text.str();
  else
    write_text(o.out, text.str());
  return kExitOk;
}

int cmd_score(const Options& o, std::ostream& out) {
  const auto trace = read_trace(o.trace);
  const auto baseline_config = o.baseline.empty() ? trace.baseline : parse_canonical(o.baseline);
  const auto baseline = trace.measured(baseline_config);
  if (!baseline) throw std::runtime_error("baseline was not measured in this run: " + to_canonical(baseline_config));
  std::ostringstream text;
  if (o.format == "json") {
    Json rows = Json::array();
    for (const auto& e : trace.final_archive.entries())
      rows.push_back({{"config", to_canonical(e.config)},
                      {"performance", e.perf},
                      {"efficiency_score", efficiency_score(e.perf, *baseline)}});
    text << Json{{"baseline", to_canonical(baseline_config)}, {"rows", rows}}.dump(2) << '\n';
  } else {
    text << "config,accuracy_pct,latency_ms,memory_gb,energy_j,efficiency_score\n";
    for (const auto& e : trace.final_archive.entries())
      text << csv_field(to_canonical(e.config)) << ',' << format_number(e.perf.accuracy_pct) << ','
           << format_number(e.perf.latency_ms) << ',' << format_number(e.perf.memory_gb) << ','
           << format_number(e.perf.energy_j) << ',' << format_number(efficiency_score(e.perf, *baseline)) << '\n';
  }
  if (o.out.empty())
    out << text.str();
  else
    write_text(o.out, text.str());
  return kExitOk;
}

int cmd_presets(const Options& o, std::ostream& out) {
  const auto presets = scenario_presets();
  if (o.format == "json") {
    Json rows = Json::array();
    for (const auto& p : presets)
      rows.push_back({{"name", p.name},
                      {"summary", p.summary},
                      {"model", p.model},
                      {"config", to_canonical(p.config)},
                      {"illustrative_target", {{"memory_gb", p.quoted_memory_gb}, {"latency_ms", p.quoted_latency_ms}}}});
    out << rows.dump(2) << '\n';
    return kExitOk;
  }
  for (const auto& p : presets)
    out << p.name << " (" << p.model.name << "): " << to_canonical(p.config)
        << "  [illustrative target: " << format_number(p.quoted_memory_gb) << " GB, "
        << format_number(p.quoted_latency_ms) << " ms]\n";
  return kExitOk;
}

int cmd_landscape(const Options& o, std::ostream& out) {
  const auto land = SyntheticLandscape::generate(o.landscape_seed, parse_landscape_profile(o.landscape), model(o),
                                                 task(o));
  const auto doc = (o.no_interactions ? land.without_interactions() : land).definition();
  if (o.out.empty())
    out << doc.dump(2) << '\n';
  else
    write_json_file(o.out, doc);
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

int cmd_rerun(const Options& o, std::ostream& out, std::ostream& err, int depth) {
  if (depth > 0) throw UsageError("a manifest cannot rerun another manifest");
  const auto doc = read_json_file(o.manifest);
  const auto argv = doc.at("argv").get<std::vector<std::string>>();
  return dispatch(argv, out, err, depth + 1);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  Options o;
  CLI::App app{"Multi-objective efficiency configuration search", "effsearch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto* space = app.add_subcommand("space", "Count or list configurations of a space");
  space->add_option("action", o.action, "count or list")->required()->check(CLI::IsMember({"count", "list"}));
  space->add_option("--space", o.space, "Configuration space preset")->capture_default_str();

  auto* search = app.add_subcommand("search", "One surrogate-assisted (or direct) NSGA-II search");
  add_evaluator_flags(search, o);
  add_search_flags(search, o);
  search->add_flag("--direct", o.direct, "Search on the true evaluator instead of the surrogate");
  search->add_flag("--validate", o.validate_archive, "Measure the predicted archive before export");
  search->add_option("--out", o.out, "Output directory");

  auto* refine = app.add_subcommand("refine", "Measure-and-refine run writing a trace file");
  add_evaluator_flags(refine, o);
  add_search_flags(refine, o);
  add_weight_flags(refine, o);
  refine->add_option("--iters", o.iters, "Refinement iterations")->capture_default_str();
  refine->add_option("--k", o.k, "Evaluations per iteration")->capture_default_str();
  refine->add_option("--out", o.out, "Trace file (default trace.json)");
  refine->add_option("--manifest", o.manifest, "Manifest file (default <trace>.manifest.json)");

  auto* rec = app.add_subcommand("recommend", "Utility argmax over a trace's final archive");
  rec->add_option("--trace", o.trace, "Trace file")->required();
  add_weight_flags(rec, o);
  rec->add_option("--hw-mem", o.hw_mem, "Memory cap in GB (default: the run's)");
  rec->add_option("--hw-power", o.hw_power, "Power cap in W (default: the run's)");
  rec->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* sens = app.add_subcommand("sensitivity", "Per-axis sweep around a configuration");
  sens->add_option("--trace", o.trace, "Trace file")->required();
  sens->add_option("--config", o.config, "Canonical configuration")->required();
  sens->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
  sens->add_option("--out", o.out, "Report file (default stdout)");
  sens->add_flag("--parallel", o.parallel, "Use OpenMP kernels");

  auto* score = app.add_subcommand("score", "Efficiency scores of the final archive against a baseline");
  score->add_option("--trace", o.trace, "Trace file")->required();
  score->add_option("--baseline", o.baseline, "Baseline configuration (default: the run's)");
  score->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
  score->add_option("--out", o.out, "Report file (default stdout)");

  auto* presets = app.add_subcommand("presets", "Deployment scenario presets");
  presets->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* land = app.add_subcommand("landscape", "Synthetic landscape definitions");
  land->add_option("action", o.action, "export")->required()->check(CLI::IsMember({"export"}));
  land->add_option("--landscape", o.landscape, "Profile")->capture_default_str();
  land->add_option("--landscape-seed", o.landscape_seed, "Seed")->capture_default_str();
  land->add_flag("--no-interactions", o.no_interactions, "Disable interaction terms");
  land->add_option("--model", o.model, "Model name")->capture_default_str();
  land->add_option("--model-params", o.model_params, "Model parameter count")->capture_default_str();
  land->add_option("--model-family", o.model_family, "Model family")->capture_default_str();
  land->add_option("--task", o.task, "Task name")->capture_default_str();
  land->add_option("--task-domain", o.task_domain, "Task domain")->capture_default_str();
  land->add_option("--difficulty", o.difficulty, "Task difficulty")->capture_default_str();
  land->add_option("--seq-len", o.seq_len, "Sequence length")->capture_default_str();
  land->add_option("--out", o.out, "Output file (default stdout)");

  auto* rerun = app.add_subcommand("rerun", "Repeat the command recorded in a manifest");
  rerun->add_option("--manifest", o.manifest, "Manifest file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*space) return cmd_space(o, out);
    if (*search) return cmd_search(o, args, *search, out);
    if (*refine) return cmd_refine(o, args, *refine, out);
    if (*rec) return cmd_recommend(o, out);
    if (*sens) return cmd_sensitivity(o, out);
    if (*score) return cmd_score(o, out);
    if (*presets) return cmd_presets(o, out);
    if (*land) return cmd_landscape(o, out);
    if (*rerun) return cmd_rerun(o, out, err, depth);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, out, err, 0);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace effsearch::cli
