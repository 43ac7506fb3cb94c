#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dkg/errors.hpp"
#include "dkg/experiments.hpp"
#include "dkg/io.hpp"

using namespace dkg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dkg_test_" + name);
  fs::remove_all(p);
  return p;
}

Json spectrum_config() {
  return Json::parse(R"({"task": "spectrum",
                         "model": {"family": "sine_gordon", "d": 0.5, "grid": 60},
                         "seed": {"kind": "intersite_kink"}})");
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  for (double x : {3.141592653589793, 1e-17, -7.25, 123456789.123}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("csv rendering") {
  Table t{{"a", "b", "c"}, {}};
  t.add({1LL, 0.5, std::string("x")});
  t.add({-2LL, 1e-3, std::string("has,comma")});
  t.add({0LL, 2.0, std::string("say \"hi\"")});
  const std::string csv = to_csv(t);
  CHECK(csv ==
        "a,b,c\n"
        "1,0.5,x\n"
        "-2,0.001,\"has,comma\"\n"
        "0,2,\"say \"\"hi\"\"\"\n");
  CHECK_THROWS_AS(t.add({1LL}), InvalidArgumentError);
  CHECK(to_csv(Table{{"only"}, {}}) == "only\n");
}

TEST_CASE("sha256 of known inputs") {
  const fs::path dir = scratch("sha");
  fs::create_directories(dir);
  write_atomic(dir / "abc.txt", "abc");
  CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  write_atomic(dir / "empty.txt", "");
  CHECK(sha256_file(dir / "empty.txt") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK_THROWS_AS(sha256_file(dir / "missing"), Error);
  fs::remove_all(dir);
}

TEST_CASE("write_run layout") {
  RunOutput out;
  out.config = Json{{"task", "demo"}};
  out.results["x"] = 1.5;
  out.warnings.push_back("careful");
  out.timings["total_s"] = 0.01;
  Table t{{"n", "u"}, {}};
  t.add({0LL, 1.0});
  out.tables.emplace_back("profile.csv", t);
  const fs::path dir = scratch("run");
  const auto w = write_run(out, dir, "2026-01-01T00:00:00Z");
  CHECK(fs::exists(dir / "profile.csv"));
  CHECK(slurp(dir / "profile.csv") == "n,u\n0,1\n");
  const Json s = Json::parse(slurp(dir / "summary.json"));
  for (const char* k : {"config", "results", "warnings", "timings"}) CHECK(s.contains(k));
  CHECK(s["warnings"][0] == "careful");
  const Json m = Json::parse(slurp(dir / "manifest.json"));
  CHECK(m["tool_version"] == kToolVersion);
  CHECK(m["started"] == "2026-01-01T00:00:00Z");
  bool listed = false;
  for (const auto& o : m["outputs"]) {
    if (o["file"] == "profile.csv") {
      listed = true;
      CHECK(o["sha256"] == sha256_file(dir / "profile.csv"));
    }
  }
  CHECK(listed);
  CHECK(w.files.size() >= 3);
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
  fs::remove_all(dir);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(parse_config(spectrum_config()));
  CHECK(parse_config(spectrum_config()).model.grid == 60);

  auto no_d = spectrum_config();
  no_d["model"].erase("d");
  CHECK_THROWS_AS(parse_config(no_d), ConfigError);

  auto neg = spectrum_config();
  neg["model"]["d"] = -1.0;
  CHECK_THROWS_AS(parse_config(neg), ConfigError);

  auto fam = spectrum_config();
  fam["model"]["family"] = "kdv";
  CHECK_THROWS_AS(parse_config(fam), ConfigError);

  auto grid = spectrum_config();
  grid["model"]["grid"] = 2;
  CHECK_THROWS_AS(parse_config(grid), ConfigError);

  auto seed = spectrum_config();
  seed["seed"]["kind"] = "breather";
  CHECK_THROWS_AS(parse_config(seed), ConfigError);

  auto dist = spectrum_config();
  dist["seed"] = Json{{"kind", "multikink"}, {"distances", {1}}};
  CHECK_THROWS_AS(parse_config(dist), ConfigError);

  CHECK_THROWS_AS(parse_config(spectrum_config(), "evolve"), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::array()), ConfigError);
  auto unknown = spectrum_config();
  unknown["task"] = "plot";
  CHECK_THROWS_AS(parse_config(unknown), ConfigError);

  auto predict = spectrum_config();
  predict["task"] = "predict";
  CHECK_THROWS_AS(parse_config(predict), ConfigError);  // single kink seed
  predict["seed"] = Json{{"kind", "multikink"}, {"distances", {8}}};
  predict["model"]["d"] = 0.25;
  CHECK_NOTHROW(parse_config(predict));
}

TEST_CASE("task pipeline is deterministic") {
  const auto cfg = parse_config(spectrum_config());
  const RunOutput a = run_task(cfg), b = run_task(cfg);
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) {
    CHECK(a.tables[i].first == b.tables[i].first);
    CHECK(to_csv(a.tables[i].second) == to_csv(b.tables[i].second));
  }
  CHECK(a.results == b.results);
  bool has_vectors = false;
  for (const auto& [name, t] : a.tables) has_vectors |= name == "eigenvectors.csv";
  CHECK(has_vectors);
}

TEST_CASE("figure registry") {
  CHECK(figure_ids().size() >= 10);
  CHECK_THROWS_AS(reproduce_figure("nope"), InvalidArgumentError);
}
