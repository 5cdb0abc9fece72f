#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "cbtomo/io/config.hpp"
#include "cbtomo/io/csv.hpp"
#include "cbtomo/io/manifest.hpp"
#include "cbtomo/io/presets.hpp"
#include "cbtomo/io/run.hpp"
#include "cbtomo/parallel.hpp"
#include "cbtomo/rng.hpp"
#include "doctest.h"

using namespace cbtomo;
using namespace cbtomo::io;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cbtomo_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("number formatting is fixed and round-trips") {
  CHECK(format_double(0.1) == "1.0000000000000001e-01");
  CHECK(format_double(-2.0) == "-2.0000000000000000e+00");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  for (double v : {1.0 / 3.0, 6.02214076e23, -1e-300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("csv writer and reader") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  const std::string path = (dir / "t.csv").string();
  {
    CsvWriter w(path, {"a", "b", "c"});
    w.row({1.5, 3LL, std::string("x")});
    CHECK_THROWS(w.row({1.0}));
    w.close();
  }
  CHECK(slurp(path) == "a,b,c\n1.5000000000000000e+00,3,x\n");
  const CsvTable t = read_csv(path);
  CHECK(t.rows.size() == 1);
  CHECK(t.rows[0][t.column("b")] == "3");
  CHECK_THROWS(t.column("d"));
  fs::remove_all(dir);
}

TEST_CASE("sha256 of a known string") {
  const fs::path dir = scratch("sha");
  fs::create_directories(dir);
  std::ofstream(dir / "abc", std::ios::binary) << "abc";
  CHECK(sha256_file((dir / "abc").string()) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove_all(dir);
}

TEST_CASE("presets are sorted, parse and round-trip through serialization") {
  const auto& all = presets();
  std::vector<std::string> names;
  for (const auto& p : all) {
    names.push_back(p.name);
  }
  CHECK(names == std::vector<std::string>{"fig3", "fig4b", "fig5", "fig6", "fig7", "fig8"});
  for (const auto& p : all) {
    CAPTURE(p.name);
    const ExperimentConfig c = parse_config(p.yaml);
    const std::string text = serialize_config(c);
    CHECK(parse_config(text) == c);
    CHECK(serialize_config(parse_config(text)) == text);
  }
  CHECK_THROWS_AS(find_preset("fig9"), std::out_of_range);
}

TEST_CASE("unknown keys are rejected with their name") {
  try {
    load_config(std::string(CBTOMO_SOURCE_DIR) + "/tests/data/unknown_key.yaml");
    FAIL("accepted an unknown key");
  } catch (const ConfigError& e) {
    CHECK(e.key.find("colour") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("kind: spectrum\ntarget: {ec: 1.0, ejj: 3}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("kind: nonsense\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("kind: spectrum\ntarget: {ec: -1.0}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("kind: spectrum\ntarget: {ec: abc}\n"), ConfigError);
}

TEST_CASE("tolerance overrides") {
  ExperimentConfig c = parse_config("kind: reconstruct\n");
  apply_tolerance_override(c, "rank=1e-7");
  CHECK(c.tolerances.rank == 1e-7);
  CHECK_THROWS_AS(apply_tolerance_override(c, "speed=3"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(c, "rank"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(c, "rank=fast"), ConfigError);
}

TEST_CASE("sweep ranges expand and set entries name circuit fields") {
  const ExperimentConfig c = parse_config(
      "kind: circuit-sweep\nsweeps:\n  - {name: s, parameter: ccp, range: {start: 0, stop: 2, count: 3}, "
      "set: {ng: 0.25}}\n");
  REQUIRE(c.sweeps.size() == 1);
  CHECK(c.sweeps[0].values == std::vector<double>{0.0, 1.0, 2.0});
  CircuitSection s;
  set_circuit_field(s, "ng", 0.25);
  CHECK(s.ng == 0.25);
  CHECK_THROWS_AS(set_circuit_field(s, "volume", 1.0), ConfigError);
}

TEST_CASE("runs are byte-identical and the manifest hashes its outputs") {
  const std::string yaml = find_preset("fig3").yaml;
  const ExperimentConfig config = parse_config(yaml);
  const fs::path a = scratch("run_a");
  const fs::path b = scratch("run_b");
  const RunManifest ma = run_experiment(config, yaml, {a.string(), 1});
  run_experiment(config, yaml, {b.string(), 1});
  CHECK(slurp(a / "config.yaml") == yaml);
  for (const auto& out : ma.outputs) {
    CAPTURE(out.name);
    CHECK(slurp(a / out.name) == slurp(b / out.name));
    CHECK(out.sha256 == sha256_file((a / out.name).string()));
  }
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(ma.rng == CounterRng::name);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("counter generator is reproducible and roughly standard normal") {
  CounterRng a(42, 3);
  CounterRng b(42, 3);
  CounterRng c(42, 4);
  double sum = 0.0;
  double squares = 0.0;
  const int n = 20000;
  bool same = true;
  bool differs = false;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal();
    same = same && x == b.normal();
    differs = differs || x != c.normal();
    sum += x;
    squares += x * x;
  }
  CHECK(same);
  CHECK(differs);
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(squares / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
  CHECK(std::set<int>(hits.begin(), hits.end()) == std::set<int>{1});
}
