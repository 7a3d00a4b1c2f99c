// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "effsearch/cli.hpp"
#include "effsearch/serialization.hpp"

namespace fs = std::filesystem;
using effsearch::Json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = effsearch::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("effsearch_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> small_refine(const fs::path& trace) {
  return {"refine", "--n0", "30", "--iters", "1", "--k", "5", "--pop", "20", "--gens", "5", "--trees", "30",
          "--depth", "4", "--ensemble", "2", "--seed", "3", "--hw-mem", "60", "--out", trace.string()};
}

}  // namespace

TEST_CASE("space counts and usage errors") {
  const auto r = cli({"space", "count"});
  CHECK(r.code == 0);
  CHECK(r.out == "arch=28 ft=61 inf=30 total=51240\n");
  CHECK(cli({"space", "count", "--space", "bogus"}).code == 2);
  CHECK(cli({"space", "frobnicate"}).code == 2);
  CHECK(cli({"nosuchcommand"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"search", "--gens", "0"}).code == 2);
}

TEST_CASE("presets") {
  const auto r = cli({"presets", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j.size() == 3);
  CHECK(j[0]["config"] == "arch=MQA+moe(dense)|ft=LoRA(r=16,a=2r)|inf=INT4/AWQ+kv=MQA");
}

TEST_CASE("refine is byte-reproducible and rerun repeats it") {
  const auto dir = scratch("refine");
  const auto a = dir / "a.json", b = dir / "b.json";
  const auto ra = cli(small_refine(a));
  REQUIRE(ra.code == 0);
  CHECK(ra.out.find("true_evaluations=35 n0=30 selected=5") != std::string::npos);
  REQUIRE(cli(small_refine(b)).code == 0);
  CHECK(slurp(a) == slurp(b));

  const auto manifest = fs::path(a.string() + ".manifest.json");
  REQUIRE(fs::exists(manifest));
  const auto m = Json::parse(slurp(manifest));
  CHECK(m["command"] == "refine");
  CHECK(m["seed"] == 3);
  const auto before = slurp(a);
  fs::remove(a);
  CHECK(cli({"rerun", "--manifest", manifest.string()}).code == 0);
  CHECK(slurp(a) == before);

  SUBCASE("recommend") {
    const auto r = cli({"recommend", "--trace", a.string(), "--w-acc", "1", "--w-lat", "0", "--w-mem", "0",
                        "--w-energy", "0", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto doubled = cli({"recommend", "--trace", a.string(), "--w-acc", "2", "--w-lat", "0", "--w-mem", "0",
                              "--w-energy", "0", "--format", "json"});
    CHECK(Json::parse(r.out)["config"] == Json::parse(doubled.out)["config"]);
    CHECK(cli({"recommend", "--trace", a.string(), "--hw-mem", "0.000001"}).code == 4);
    CHECK(cli({"recommend", "--trace", a.string(), "--w-acc", "-1"}).code == 2);
  }
  SUBCASE("score") {
    const auto r = cli({"score", "--trace", a.string(), "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("config,accuracy_pct,latency_ms,memory_gb,energy_j,efficiency_score\n", 0) == 0);
  }
  SUBCASE("sensitivity") {
    const auto trace = Json::parse(before);
    const std::string base = trace["header"]["baseline"];
    const auto r = cli({"sensitivity", "--trace", a.string(), "--config", base, "--format", "json"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out).size() == 33);
    CHECK(cli({"sensitivity", "--trace", a.string(), "--config", "junk"}).code == 3);
  }
  CHECK(cli({"recommend", "--trace", (dir / "missing.json").string()}).code == 3);
}

TEST_CASE("rerun refuses nested manifests") {
  const auto dir = scratch("nested");
  const auto manifest = dir / "m.json";
  std::ofstream(manifest) << R"({"tool":"effsearch","command":"rerun","argv":["rerun","--manifest","x"]})";
  CHECK(cli({"rerun", "--manifest", manifest.string()}).code != 0);
}

TEST_CASE("direct search writes its outputs") {
  const auto dir = scratch("search");
  const auto r = cli({"search", "--direct", "--pop", "20", "--gens", "3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "generations.jsonl"));
  const auto archive = Json::parse(slurp(dir / "archive.json"));
  CHECK_FALSE(archive.empty());
}

TEST_CASE("replay misses abort refine with a partial trace") {
  const auto dir = scratch("replay");
  const auto trace = dir / "t.json";
  const auto r = cli({"refine", "--replay", std::string(EFFSEARCH_FIXTURES) + "/replay_small.csv", "--model",
                      "llama-2-7b", "--task", "mmlu", "--hw-name", "a100", "--n0", "10", "--iters", "1", "--k",
                      "2", "--pop", "20", "--gens", "2", "--trees", "10", "--ensemble", "2", "--out",
                      trace.string()});
  CHECK(r.code == 3);
  CHECK(fs::exists(trace.string() + ".partial"));
}

TEST_CASE("landscape export") {
  const auto r = cli({"landscape", "export", "--landscape-seed", "9"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["seed"] == 9);
}
