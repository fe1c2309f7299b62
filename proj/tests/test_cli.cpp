#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "percolab/cli.hpp"
#include "percolab/error.hpp"

using namespace percolab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("percolab_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && !line.starts_with('#')) out.push_back(line);
  return out;
}

const char* kChain = R"({
  "model": {"kind": "bernoulli", "p": 0.8, "lattice": {"dim": 1}},
  "event": {"kind": "point", "n": [5, 10, 15, 20], "coarse": false},
  "mc": {"samples": 20000, "seed": 42}
})";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    return e.what();
  }
  FAIL("config accepted");
  return {};
}

}  // namespace

TEST_CASE("estimate-rate smoke run on the chain") {
  const auto dir = scratch("rate");
  const auto report = run("estimate-rate", parse_config(kChain), {dir, std::nullopt});
  CHECK(report.status == 0);
  const auto rows = data_lines(slurp(dir / "estimate-rate.csv"));
  REQUIRE(rows.size() == 5);  // header plus one row per N
  const auto j = nlohmann::json::parse(slurp(dir / "estimate-rate.json"));
  const double slope = j["directions"][0]["fit"]["slope"].get<double>();
  CHECK(std::abs(slope + std::log(0.8)) < 0.03);
  CHECK(j["manifest"]["seed"] == 42);
  CHECK(j["manifest"]["version"] == std::string(version()));
  CHECK(j["manifest"].contains("timestamp"));
}

TEST_CASE("re-runs produce identical CSV bodies") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  run("estimate-rate", parse_config(kChain), {a, 1});
  run("estimate-rate", parse_config(kChain), {b, 3});
  CHECK(slurp(a / "estimate-rate.csv") == slurp(b / "estimate-rate.csv"));
}

TEST_CASE("config hash ignores formatting and comments") {
  const auto c1 = parse_config(kChain);
  const auto c2 = parse_config(std::string("// note\n") +
                               R"({"mc":{"seed":42,"samples":20000},"event":{"coarse":false,"n":[5,10,15,20],"kind":"point"},)"
                               R"("model":{"lattice":{"dim":1},"p":0.8,"kind":"bernoulli"}})");
  CHECK(c1.hash == c2.hash);
  CHECK(parse_config(R"({"mc": {"samples": 10, "seed": 43}})").hash != parse_config(R"({"mc": {"samples": 10, "seed": 42}})").hash);
  // Reference FNV-1a values.
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error(R"({"mc": {"samples": 10}})").find("mc.seed") != std::string::npos);
  CHECK(config_error(R"({"model": {"kind": "bernoulli"}, "mc": {"samples": 10, "seed": 1}})").find("model.p") !=
        std::string::npos);
  CHECK(config_error(R"({"mc": {"samples": -3, "seed": 1}})").find("mc.samples") != std::string::npos);
  CHECK(config_error(R"({"mc": {"samples": 3, "seed": 1, "ci_level": 2}})").find("mc.ci_level") != std::string::npos);
  CHECK(config_error(R"({"model": {"kind": "potts", "p": 0.3}, "mc": {"samples": 3, "seed": 1}})")
            .find("model.kind") != std::string::npos);
  CHECK(config_error(R"({"event": {"n": [3, 2]}, "mc": {"samples": 3, "seed": 1}})").find("event.n") !=
        std::string::npos);
  CHECK(config_error(R"({"model": {"kind": "bernoulli", "p": 0.3, "lattice": {"dim": "two"}}, "mc": {"samples": 3, "seed": 1}})")
            .find("model.lattice.dim") != std::string::npos);
  CHECK(config_error("{not json").find("JSON") != std::string::npos);
  const auto cfg = parse_config(R"({"mc": {"samples": 3, "seed": 1}})");
  try {
    run("estimate-rate", cfg, {scratch("missing"), std::nullopt});
    FAIL("expected ConfigInvalid");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("model") != std::string::npos);
  }
  CHECK_THROWS_AS(run("plot", cfg), Error);
}

TEST_CASE("fekete-check inline sequences") {
  const auto dir = scratch("fekete");
  auto ok = run("fekete-check", parse_config(R"({
    "fekete": {"sequence": [3, 6, 9, 12, 15, 18], "f": {"kind": "zero"}, "g": {"kind": "zero"}, "c_minus": 2, "c_plus": 4},
    "mc": {"samples": 1, "seed": 0}})"), {dir, std::nullopt});
  CHECK(ok.status == 0);
  auto bad = run("fekete-check", parse_config(R"({
    "fekete": {"sequence": [1.5, 2, 4.5, 4, 7.5, 6], "f": {"kind": "zero"}, "g": {"kind": "zero"}, "c_minus": 0.5, "c_plus": 2},
    "mc": {"samples": 1, "seed": 0}, "output": {"prefix": "bad"}})"), {dir, std::nullopt});
  CHECK(bad.status == 1);
  const auto rows = data_lines(slurp(dir / "bad.csv"));
  CHECK(rows.size() > 1);
}

TEST_CASE("fekete-check reads a sequence file relative to the config") {
  const auto dir = scratch("fekete_file");
  {
    std::ofstream(dir / "seq.csv") << "n,a,uncertainty\n1,1,0.1\n2,2,0.1\n3,3.05,0.1\n4,4,0.1\n";
    std::ofstream(dir / "cfg.json") << R"({"fekete": {"file": "seq.csv", "f": {"kind": "zero"}, "g": {"kind": "zero"},
      "c_minus": 0.5, "c_plus": 2}, "mc": {"samples": 1, "seed": 0}})";
  }
  const auto r = run("fekete-check", dir / "cfg.json", {dir, std::nullopt});
  CHECK(r.status == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "fekete-check.json"));
  CHECK(j["excused"].get<int>() > 0);
}

TEST_CASE("oracle-test, coarse-grain-demo and duality-check small runs") {
  const auto dir = scratch("misc");
  const auto o = run("oracle-test", parse_config(R"({"oracle": {"cases": 5, "min_covered": 4},
    "mc": {"samples": 20000, "seed": 3, "ci_level": 0.99}})"), {dir, std::nullopt});
  CHECK(o.status == 0);
  CHECK(data_lines(slurp(dir / "oracle-test.csv")).size() == 6);

  const auto cg = run("coarse-grain-demo", parse_config(R"({"model": {"kind": "bernoulli", "p": 0.4},
    "coarse_grain": {"delta_radius": 1, "k": 2, "clusters": 25, "box_radius": 30},
    "mc": {"samples": 1, "seed": 3}})"), {dir, std::nullopt});
  CHECK(cg.status == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "coarse-grain-demo.json"));
  CHECK(j["valid"] == 25);
  CHECK(j["round_trip"] == 25);
  CHECK(j["covering_with_range_ok"] == 25);

  {
    std::ofstream(dir / "pp.csv") << "angle,value,uncertainty\n";
    std::ofstream out(dir / "pp.csv", std::ios::app);
    for (int i = 0; i < 16; ++i) out << (2 * 3.141592653589793 * i / 16) << ",1,0.01\n";
    std::ofstream(dir / "dual.json") << R"({"duality": {"pp_table": "pp.csv"}, "mc": {"samples": 1, "seed": 5}})";
  }
  const auto d = run("duality-check", dir / "dual.json", {dir, std::nullopt});
  CHECK(d.status == 0);
  CHECK(data_lines(slurp(dir / "duality-check.csv")).size() == 17);
}

TEST_CASE("norm-table on a coarse square-lattice run") {
  const auto dir = scratch("norm");
  const auto r = run("norm-table", parse_config(R"({
    "model": {"kind": "bernoulli", "p": 0.25},
    "event": {"kind": "point", "n": [3, 6, 9]},
    "norm_table": {"directions": 8, "closure": "angular_linear"},
    "mc": {"samples": 20000, "seed": 9}})"), {dir, std::nullopt});
  CHECK(r.status == 0);
  const auto table = slurp(dir / "norm-table_table.csv");
  CHECK(data_lines(table).size() == 9);
  CHECK(fs::exists(dir / "norm-table_ball.csv"));
  CHECK(fs::exists(dir / "norm-table_polar.csv"));
}

TEST_CASE("subcriticality probe aborts supercritical runs") {
  try {
    run("estimate-rate", parse_config(R"({
      "model": {"kind": "bernoulli", "p": 0.9},
      "event": {"kind": "point", "n": [2, 3]},
      "probe": {"radii": [1, 2, 4, 8], "samples": 4000},
      "mc": {"samples": 100, "seed": 2}})"), {scratch("probe"), std::nullopt});
    FAIL("expected SubcriticalityDoubt");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SubcriticalityDoubt);
  }
}
