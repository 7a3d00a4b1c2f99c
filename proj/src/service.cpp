// SPDX-License-Identifier: Apache-2.0
#include "effsearch/service.hpp"

#include <cmath>

#include <httplib.h>

#include "effsearch/predictor.hpp"
#include "effsearch/sensitivity.hpp"

namespace effsearch {

std::shared_ptr<const PublishedRun> publish(RefinementTrace trace, Exec exec) {
  auto run = std::make_shared<PublishedRun>();
  try {
    run->space = ConfigSpace::named(trace.space);
  } catch (const std::invalid_argument& e) {
    throw PublishError(e.what());
  }
  const auto& entries = trace.final_archive.entries();
  if (entries.empty()) throw PublishError("trace has an empty final archive");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].measured) throw PublishError("archive member is not measured: " + to_canonical(entries[i].config));
    if (!is_feasible(entries[i].perf, trace.hardware))
      throw PublishError("archive member is infeasible: " + to_canonical(entries[i].config));
    for (std::size_t j = 0; j < entries.size(); ++j)
      if (i != j && dominates(entries[j].perf, entries[i].perf))
        throw PublishError("archive member is dominated: " + to_canonical(entries[i].config));
  }
  std::vector<EfficiencyConfig> configs;
  std::vector<PerformanceVector> perf;
  for (const auto& r : trace.evaluations) {
    configs.push_back(r.config);
    perf.push_back(r.perf);
  }
  const auto samples = make_samples(configs, perf, trace.model, trace.task);
  run->ensemble = fit_ensemble(samples, static_cast<std::size_t>(trace.params.ensemble_size), trace.params.boosting,
                               derive_seed(trace.params.seed, 1), exec);
  run->baseline_perf = trace.measured(trace.baseline);
  run->ranges = NormalizationContext::from(trace.final_archive.performances(), "archive");
  run->trace = std::move(trace);
  return run;
}

std::optional<Recommendation> recommend(const ParetoArchive& archive, const PreferenceWeights& w,
                                        const HardwareSpec& hw, const NormalizationContext& ctx) {
  std::optional<Recommendation> best;
  for (const auto& e : archive.entries()) {
    if (!is_feasible(e.perf, hw)) continue;
    const double u = utility(e.perf, w, ctx);
    if (!best || u > best->utility) best = Recommendation{e, u};
  }
  return best;
}

namespace {

ApiResponse json_response(int status, const Json& body) { return {status, body.dump()}; }

ApiResponse error_response(int status, const std::string& message) {
  return json_response(status, Json{{"error", message}});
}

ApiResponse not_published() { return error_response(503, "no run published"); }

Json ranges_json(const NormalizationContext& ctx) {
  Json out = Json::object();
  for (Metric m : kMetrics) out[std::string(metric_field(m))] = {{"min", ctx.min(m)}, {"max", ctx.max(m)}};
  return out;
}

bool finite_number(const Json& j) { return j.is_number() && std::isfinite(j.get<double>()); }

}  // namespace

void Service::load(std::shared_ptr<const PublishedRun> run) {
  std::lock_guard lock(mu_);
  run_ = std::move(run);
}

std::shared_ptr<const PublishedRun> Service::snapshot() const {
  std::lock_guard lock(mu_);
  return run_;
}

ApiResponse Service::run() const {
  const auto run = snapshot();
  if (!run) return not_published();
  const auto& t = run->trace;
  std::size_t selected = 0;
  for (const auto& it : t.iterations) selected += it.selected.size();
  Json doc{{"space", t.space},
           {"evaluator", t.evaluator},
           {"model", t.model},
           {"task", t.task},
           {"hardware", t.hardware},
           {"baseline", to_canonical(t.baseline)},
           {"iterations", t.iterations.size()},
           {"budget",
            {{"true_evaluations", t.true_evaluations()},
             {"initial_sample", t.true_evaluations() - selected},
             {"selected", selected}}},
           {"archive_size", t.final_archive.size()},
           {"metric_ranges", ranges_json(run->ranges)}};
  return json_response(200, doc);
}

ApiResponse Service::front() const {
  const auto run = snapshot();
  if (!run) return not_published();
  Json out = Json::array();
  for (const auto& e : run->trace.final_archive.entries()) {
    out.push_back({{"config", to_canonical(e.config)},
                   {"structured", e.config},
                   {"performance", e.perf},
                   {"efficiency_score",
                    run->baseline_perf ? Json(efficiency_score(e.perf, *run->baseline_perf)) : Json(nullptr)},
                   {"is_baseline", e.config == run->trace.baseline}});
  }
  return json_response(200, out);
}

ApiResponse Service::recommend(const std::string& body) const {
  const auto run = snapshot();
  if (!run) return not_published();
  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::parse_error&) {
    return error_response(400, "request body is not JSON");
  }
  if (!req.is_object() || !req.contains("weights") || !req["weights"].is_object())
    return error_response(422, "weights object required");
  for (const auto& [key, value] : req["weights"].items()) {
    if (key != "w_acc" && key != "w_lat" && key != "w_mem" && key != "w_energy")
      return error_response(422, "unknown weight " + key);
    if (!finite_number(value)) return error_response(422, "weight " + key + " must be a finite number");
  }
  const auto w = req["weights"].get<PreferenceWeights>();
  if (!is_valid(w)) return error_response(422, "weights must be nonnegative with at least one positive");
  HardwareSpec hw = run->trace.hardware;
  for (const auto& [key, cap] : {std::pair{"memory_cap_gb", &hw.memory_cap_gb}, {"power_cap_w", &hw.power_cap_w}}) {
    if (!req.contains(key) || req[key].is_null()) continue;
    if (!finite_number(req[key]) || req[key].get<double>() <= 0.0)
      return error_response(422, std::string(key) + " must be a positive number");
    *cap = req[key].get<double>();
  }
  const auto best = effsearch::recommend(run->trace.final_archive, w, hw, run->ranges);
  if (!best) return error_response(404, "no feasible configuration");
  return json_response(200, Json{{"config", to_canonical(best->entry.config)},
                                 {"structured", best->entry.config},
                                 {"utility", best->utility},
                                 {"performance", best->entry.perf}});
}

ApiResponse Service::sensitivity(const std::string& config) const {
  const auto run = snapshot();
  if (!run) return not_published();
  EfficiencyConfig c;
  try {
    c = parse_canonical(config);
  } catch (const ConfigParseError& e) {
    return error_response(400, e.what());
  }
  if (!validate(c, run->space)) return error_response(404, "configuration outside the run's space");
  const SurrogatePredictor predictor(run->ensemble, run->trace.model, run->trace.task);
  const auto rows = effsearch::sensitivity(
      c, run->space, [&](const EfficiencyConfig& x) { return predictor.evaluate(x); },
      run->trace.params.reporting_weights, run->ranges, true);
  return json_response(200, Json{{"config", to_canonical(c)}, {"rows", sensitivity_json(rows)}});
}

void Service::mount(httplib::Server& server) const {
  auto send = [this](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    if (!cors_origin_.empty()) res.set_header("Access-Control-Allow-Origin", cors_origin_);
    res.set_content(r.body, "application/json");
  };
  server.Get("/api/run", [this, send](const httplib::Request&, httplib::Response& res) { send(res, run()); });
  server.Get("/api/front", [this, send](const httplib::Request&, httplib::Response& res) { send(res, front()); });
  server.Post("/api/recommend", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, recommend(req.body));
  });
  server.Get("/api/sensitivity", [this, send](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("config")) {
      send(res, error_response(400, "config parameter required"));
      return;
    }
    send(res, sensitivity(req.get_param_value("config")));
  });
  if (!cors_origin_.empty()) {
    server.Options(R"(/api/.*)", [this](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Origin", cors_origin_);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
  }
}

}  // namespace effsearch
