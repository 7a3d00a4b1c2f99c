// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <limits>
#include <thread>

#include <httplib.h>

#include "effsearch/landscape.hpp"
#include "effsearch/service.hpp"

using namespace effsearch;

namespace {

RefinementTrace small_trace(const std::string& space_name) {
  const auto land = SyntheticLandscape::generate(3, LandscapeProfile::Default);
  RefinementParams p;
  p.initial_sample_size = 40;
  p.iterations = 1;
  p.evaluations_per_iteration = 5;
  p.search.population_size = 20;
  p.search.generations = 5;
  p.boosting.n_estimators = 30;
  p.boosting.max_depth = 4;
  p.ensemble_size = 2;
  p.seed = 4;
  const HardwareSpec hw{"cap", 60.0, std::numeric_limits<double>::infinity()};
  return run_adaptive_optimization(ConfigSpace::named(space_name), land, hw, land.model(), land.task(), p).trace;
}

const RefinementTrace& full_trace() {
  static const RefinementTrace t = small_trace("full");
  return t;
}

std::shared_ptr<const PublishedRun> published() {
  static const auto run = publish(full_trace());
  return run;
}

}  // namespace

TEST_CASE("endpoints answer 503 before a run is published") {
  const Service s;
  CHECK(s.run().status == 503);
  CHECK(s.front().status == 503);
  CHECK(s.recommend(R"({"weights":{"w_acc":1}})").status == 503);
  CHECK(s.sensitivity(to_canonical(ConfigSpace::full().first())).status == 503);
}

TEST_CASE("publish rejects unusable traces") {
  auto t = full_trace();
  t.space = "bogus";
  CHECK_THROWS_AS(publish(t), PublishError);
  t = full_trace();
  t.final_archive = ParetoArchive();
  CHECK_THROWS_AS(publish(t), PublishError);
  t = full_trace();
  auto entries = t.final_archive.entries();
  REQUIRE_FALSE(entries.empty());
  t.final_archive = ParetoArchive();
  auto unmeasured = entries.front();
  unmeasured.measured = false;
  t.final_archive.insert(unmeasured);
  CHECK_THROWS_AS(publish(t), PublishError);
}

TEST_CASE("run and front documents") {
  Service s;
  s.load(published());
  const auto run = s.run();
  REQUIRE(run.status == 200);
  const auto doc = Json::parse(run.body);
  CHECK(doc["budget"]["true_evaluations"] == full_trace().true_evaluations());
  CHECK(doc["budget"]["initial_sample"] == 40);
  CHECK(doc["archive_size"] == full_trace().final_archive.size());
  CHECK(doc["iterations"] == 1);
  CHECK(doc["metric_ranges"].contains("latency_ms"));

  const auto front = Json::parse(s.front().body);
  REQUIRE(front.size() == full_trace().final_archive.size());
  const auto base = *full_trace().measured(full_trace().baseline);
  for (std::size_t i = 0; i < front.size(); ++i) {
    const auto& e = full_trace().final_archive.entries()[i];
    CHECK(front[i]["config"] == to_canonical(e.config));
    CHECK(front[i]["efficiency_score"].get<double>() == doctest::Approx(efficiency_score(e.perf, base)));
    CHECK(front[i]["is_baseline"] == (e.config == full_trace().baseline));
  }
}

TEST_CASE("recommend picks the utility argmax and validates input") {
  Service s;
  s.load(published());
  const auto& entries = full_trace().final_archive.entries();
  const auto best_acc = std::max_element(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.perf.accuracy_pct < b.perf.accuracy_pct;
  });
  const auto r1 = s.recommend(R"({"weights":{"w_acc":1,"w_lat":0,"w_mem":0,"w_energy":0}})");
  REQUIRE(r1.status == 200);
  CHECK(Json::parse(r1.body)["config"] == to_canonical(best_acc->config));
  const auto r2 = s.recommend(R"({"weights":{"w_acc":2,"w_lat":0,"w_mem":0,"w_energy":0}})");
  CHECK(Json::parse(r2.body)["config"] == Json::parse(r1.body)["config"]);
  const auto scaled1 = s.recommend(R"({"weights":{"w_acc":1,"w_lat":1,"w_mem":1,"w_energy":1}})");
  const auto scaled2 = s.recommend(R"({"weights":{"w_acc":2,"w_lat":2,"w_mem":2,"w_energy":2}})");
  CHECK(Json::parse(scaled1.body)["config"] == Json::parse(scaled2.body)["config"]);

  CHECK(s.recommend(R"({"weights":{"w_acc":1},"memory_cap_gb":1e-6})").status == 404);
  CHECK(s.recommend("not json").status == 400);
  CHECK(s.recommend(R"({})").status == 422);
  CHECK(s.recommend(R"({"weights":{"w_speed":1}})").status == 422);
  CHECK(s.recommend(R"({"weights":{"w_acc":-1}})").status == 422);
  CHECK(s.recommend(R"({"weights":{"w_acc":0,"w_lat":0,"w_mem":0,"w_energy":0}})").status == 422);
  CHECK(s.recommend(R"({"weights":{"w_acc":"1"}})").status == 422);
  CHECK(s.recommend(R"({"weights":{"w_acc":1},"power_cap_w":-3})").status == 422);
}

TEST_CASE("recommend helper keeps the first member on ties") {
  ParetoArchive archive;
  const auto all = enumerate(ConfigSpace::full());
  archive.insert(ArchiveEntry{all[1], {75, 2, 1, 1}, true, true});
  archive.insert(ArchiveEntry{all[0], {50, 1, 1, 1}, true, true});
  const auto ctx = NormalizationContext::from(archive.performances(), "test");
  // acc gain 0.25 equals the normalized latency cost 1 * 0.25, both exact in binary
  const auto r = recommend(archive, PreferenceWeights{1, 0.25, 0, 0}, HardwareSpec{}, ctx);
  REQUIRE(r);
  CHECK(r->utility == 0.5);
  CHECK(r->entry.config == all[0]);
}

TEST_CASE("sensitivity endpoint") {
  Service s;
  s.load(published());
  const auto c = full_trace().final_archive.entries().front().config;
  const auto res = s.sensitivity(to_canonical(c));
  REQUIRE(res.status == 200);
  const auto doc = Json::parse(res.body);
  CHECK(doc["rows"].size() == 33);
  for (const auto& row : doc["rows"]) CHECK(row["predicted"] == true);
  CHECK(s.sensitivity("arch=???").status == 400);

  Service dense;
  dense.load(publish(small_trace("dense")));
  CHECK(dense.sensitivity("arch=GQA+moe(sparse,e=4,k=2)|ft=Full|inf=FP16+kv=Full").status == 404);
}

TEST_CASE("http server with cors") {
  Service s("http://localhost:5173");
  s.load(published());
  httplib::Server server;
  s.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto run = client.Get("/api/run");
  REQUIRE(run);
  CHECK(run->status == 200);
  CHECK(run->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  CHECK(Json::parse(run->body)["space"] == "full");
  const auto rec = client.Post("/api/recommend", R"({"weights":{"w_acc":1}})", "application/json");
  REQUIRE(rec);
  CHECK(rec->status == 200);
  const auto missing = client.Get("/api/sensitivity");
  REQUIRE(missing);
  CHECK(missing->status == 400);
  httplib::Params params{{"config", to_canonical(full_trace().baseline)}};
  const auto sens = client.Get("/api/sensitivity", params, httplib::Headers{});
  REQUIRE(sens);
  CHECK(sens->status == 200);
  const auto pre = client.Options("/api/recommend");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  server.stop();
  th.join();
}
