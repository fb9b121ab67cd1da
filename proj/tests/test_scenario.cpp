// Config parsing, serialization round-trips, artifact formats, and the
// scenario runner end to end on small grids.

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "twistlab/experiments.hpp"
#include "twistlab/scenario.hpp"

using namespace twistlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("twistlab_test_" + tag);
  fs::remove_all(d);
  return d;
}

const char* kHardyScenario = R"({
  "name": "hardy_rect",
  "task": "hardy",
  "cross_section": {"kind": "rectangle", "width": 0.6, "height": 0.3, "delta": 0.1},
  "profile": {
    "interval": [-2.0, 2.0],
    "theta_dot": [{"kind": "cos2", "center": 0.0, "half_width": 1.0, "amplitude": 2.0}]
  },
  "tube": {"L": 4.0, "delta_s": 0.2},
  "solver": {"n_eigs": 2, "seed": 77}
})";

}  // namespace

TEST_CASE("scenario json round-trip is lossless") {
  const Scenario sc = parse_scenario(kHardyScenario);
  CHECK(sc.name == "hardy_rect");
  CHECK(sc.task == TaskKind::hardy);
  CHECK(sc.delta == 0.1);
  CHECK(sc.s_a == -2.0);
  CHECK(sc.s_b == 2.0);
  CHECK(sc.L == 4.0);
  CHECK(sc.seed == 77);
  CHECK(sc.theta_dot.size() == 1);
  CHECK(sc.theta_dot[0].amplitude == 2.0);

  const std::string once = scenario_to_json(sc);
  const Scenario back = parse_scenario(once);
  const std::string twice = scenario_to_json(back);
  CHECK(once == twice);
  CHECK(scenario_hash(sc) == scenario_hash(back));
}

TEST_CASE("scenario validation points at the offending field") {
  auto expect_message = [](const char* text, const std::string& needle) {
    try {
      validate(parse_scenario(text));
      FAIL("expected ConfigError for " << needle);
    } catch (const ConfigError& e) {
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(needle));
    }
  };
  expect_message(R"({"name": "x", "task": "hardy",
      "cross_section": {"kind": "disk", "radius": 0.5, "delta": -0.1}})",
                 "cross_section.delta");
  expect_message(R"({"name": "x", "task": "spectrum",
      "cross_section": {"kind": "disk", "radius": 0.5, "delta": 0.1}})",
                 "tube");
  expect_message(R"({"name": "x", "task": "sweep",
      "cross_section": {"kind": "disk", "radius": 0.5, "delta": 0.1},
      "profile": {"interval": [-2, 2],
        "kappa1": [{"kind": "cos2", "center": 0, "half_width": 1, "amplitude": 1}]},
      "tube": {"L": 8, "delta_s": 0.5},
      "sweep": {"k_values": [0.2, 0.1]}})",
                 "k_values");

  try {
    parse_scenario("{\n  \"name\": \"x\",\n  broken\n}");
    FAIL("expected parse error");
  } catch (const ConfigError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("line 3"));
  }
}

TEST_CASE("csv doubles survive a round-trip and tables reject delimiters") {
  for (double v : {0.1, 1.0 / 3.0, 6.283185307179586, 1e-300, -0.0, 5.0}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CsvTable t({"a", "b"});
  t.add_row({1.5, "ok"});
  CHECK_THROWS_AS(t.add_row({"x,y", "z"}), ConfigError);
  CHECK_THROWS_AS(t.add_row({"only one"}), ConfigError);
  const std::string bytes(reinterpret_cast<const char*>(t.to_bytes().data()),
                          t.to_bytes().size());
  CHECK(bytes == "a,b\n1.5,ok\n");
}

TEST_CASE("runner writes a complete manifest with matching hashes") {
  const fs::path dir = fresh_dir("ground");
  Scenario sc = parse_scenario(R"({
    "name": "square_threshold",
    "task": "ground_pair",
    "cross_section": {"kind": "rectangle", "width": 1.0, "height": 1.0, "delta": 0.05}
  })");
  RunOptions opt;
  opt.out_dir = dir.string();
  const RunOutcome out = run_scenario(sc, opt);
  REQUIRE(fs::exists(out.manifest));

  const nlohmann::json m = nlohmann::json::parse(slurp(out.manifest));
  CHECK(m["scenario"] == "square_threshold");
  CHECK(m["scenario_hash"] == scenario_hash(sc));
  REQUIRE(m["artifacts"].size() >= 1);
  for (const auto& a : m["artifacts"]) {
    const fs::path f = out.dir / a["file"].get<std::string>();
    REQUIRE(fs::exists(f));
    const std::string bytes = slurp(f);
    CHECK(fnv1a64_hex(bytes) == a["fnv1a64"].get<std::string>());
    CHECK(bytes.size() == a["bytes"].get<std::size_t>());
  }

  // E1 lands near the separable reference for the unit square
  const std::string csv = slurp(out.dir / "ground_pair.csv");
  const auto pos = csv.find("E1,");
  REQUIRE(pos != std::string::npos);
  const double e1 = std::strtod(csv.c_str() + pos + 3, nullptr);
  const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(e1 - exact) < 0.01 * exact);

  // report renders and certifies the hashes
  const std::string rep = render_report(out.manifest);
  CHECK_THAT(rep, Catch::Matchers::ContainsSubstring("ok      ground_pair.csv"));
  CHECK_THAT(rep, !Catch::Matchers::ContainsSubstring("CORRUPT"));
}

TEST_CASE("reruns are byte-identical") {
  const fs::path d1 = fresh_dir("rerun1");
  const fs::path d2 = fresh_dir("rerun2");
  const Scenario sc = parse_scenario(kHardyScenario);
  RunOptions o1, o2;
  o1.out_dir = d1.string();
  o2.out_dir = d2.string();
  const RunOutcome r1 = run_scenario(sc, o1);
  const RunOutcome r2 = run_scenario(sc, o2);
  REQUIRE(r1.files == r2.files);
  for (const std::string& f : r1.files) CHECK(slurp(r1.dir / f) == slurp(r2.dir / f));
}

TEST_CASE("hardy task certifies the bound on a twisted rectangle") {
  const fs::path dir = fresh_dir("hardy");
  const Scenario sc = parse_scenario(kHardyScenario);
  RunOptions opt;
  opt.out_dir = dir.string();
  const RunOutcome out = run_scenario(sc, opt);

  const std::string rep = render_report(out.manifest);
  CHECK_THAT(rep, Catch::Matchers::ContainsSubstring("mu_star = "));
  CHECK_THAT(rep, Catch::Matchers::ContainsSubstring("c_h bound = "));
  CHECK_THAT(rep, Catch::Matchers::ContainsSubstring("PASS mu_star >= c_h bound"));

  const std::string csv = slurp(out.dir / "hardy.csv");
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("machinery_available,1"));
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("meets_bound,1"));
}

TEST_CASE("sweep task emits the constants ledger and threshold verdict") {
  const fs::path dir = fresh_dir("sweep");
  const Scenario sc = parse_scenario(R"({
    "name": "guarded_bend",
    "task": "sweep",
    "cross_section": {"kind": "rectangle", "width": 0.6, "height": 0.3, "delta": 0.1},
    "profile": {
      "interval": [-1.0, 1.0],
      "kappa1": [{"kind": "cos2", "center": 0.0, "half_width": 1.0, "amplitude": 1.0}],
      "theta_dot": [{"kind": "cos2", "center": 0.0, "half_width": 0.8, "amplitude": 3.0}]
    },
    "tube": {"L": 7.0, "delta_s": 0.35},
    "solver": {"n_eigs": 2, "seed": 3},
    "sweep": {"k_values": [0.0, 4.0]}
  })");
  RunOptions opt;
  opt.out_dir = dir.string();
  const RunOutcome out = run_scenario(sc, opt);

  const std::string ledger = slurp(out.dir / "ledger.csv");
  for (const char* name : {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "epsilon"})
    CHECK_THAT(ledger, Catch::Matchers::ContainsSubstring(std::string(name) + ","));
  CHECK_THAT(ledger, Catch::Matchers::ContainsSubstring("3 C1 C3"));

  const std::string rep = render_report(out.manifest);
  CHECK_THAT(rep, Catch::Matchers::ContainsSubstring("epsilon = "));
  CHECK_THAT(rep, Catch::Matchers::ContainsSubstring(
                      "PASS no spectrum below threshold for k <= epsilon"));

  const std::string csv = slurp(out.dir / "sweep.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "k,kappa1_sup,dkappa1_sup,solved,lowest,gap,below,k_le_epsilon,"
                "embedding_inconclusive");
  std::getline(lines, line);  // k = 0 row: solved, not below
  CHECK_THAT(line, Catch::Matchers::StartsWith("0,"));
  CHECK_THAT(line, Catch::Matchers::ContainsSubstring(",1,"));
}

TEST_CASE("injectivity task reports the certificate") {
  const fs::path dir = fresh_dir("inj");
  const Scenario sc = parse_scenario(R"({
    "name": "gentle_bend",
    "task": "injectivity",
    "cross_section": {"kind": "disk", "radius": 0.2, "delta": 0.05},
    "profile": {
      "interval": [-1.0, 1.0],
      "kappa1": [{"kind": "cos2", "center": 0.0, "half_width": 1.0, "amplitude": 0.1}]
    }
  })");
  RunOptions opt;
  opt.out_dir = dir.string();
  const RunOutcome out = run_scenario(sc, opt);
  const std::string rep = render_report(out.manifest);
  CHECK_THAT(rep, Catch::Matchers::ContainsSubstring("embedding certificate:"));
  CHECK_THAT(rep, Catch::Matchers::ContainsSubstring("CERTIFIED"));
}

TEST_CASE("export-mesh writes a closed quad tube") {
  const fs::path dir = fresh_dir("mesh");
  Scenario sc = parse_scenario(R"({
    "name": "tube_surface",
    "task": "spectrum",
    "cross_section": {"kind": "disk", "radius": 0.3, "delta": 0.1},
    "profile": {
      "interval": [-2.0, 2.0],
      "theta_dot": [{"kind": "cos2", "center": 0.0, "half_width": 1.0, "amplitude": 1.0}]
    },
    "tube": {"L": 2.0, "delta_s": 0.5},
    "mesh": {"segments": 12}
  })");
  RunOptions opt;
  opt.out_dir = dir.string();
  const RunOutcome out = export_mesh(sc, opt);
  const std::string obj = slurp(out.dir / "tube.obj");

  int n_v = 0, n_f = 0;
  std::istringstream lines(obj);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("v ", 0) == 0) ++n_v;
    if (line.rfind("f ", 0) == 0) ++n_f;
  }
  const int rings = 8 + 1;  // 2L / delta_s edges
  CHECK(n_v == rings * 12);
  CHECK(n_f == (rings - 1) * 12);

  // faces are 1-based and in range
  CHECK_THAT(obj, Catch::Matchers::ContainsSubstring("f 1 2 "));
  CHECK_THAT(obj, !Catch::Matchers::ContainsSubstring("f 0"));
}

TEST_CASE("out-dir resolution prefers flag over scenario over environment") {
  Scenario sc = parse_scenario(R"({
    "name": "res",
    "task": "ground_pair",
    "cross_section": {"kind": "rectangle", "width": 0.5, "height": 0.5, "delta": 0.25}
  })");

  const fs::path flag_dir = fresh_dir("resolve_flag");
  const fs::path env_dir = fresh_dir("resolve_env");
  setenv("TWISTLAB_OUT", env_dir.string().c_str(), 1);

  RunOptions opt;
  opt.out_dir = flag_dir.string();
  const RunOutcome a = run_scenario(sc, opt);
  CHECK(a.dir == flag_dir / "res");

  const RunOutcome b = run_scenario(sc, {});
  CHECK(b.dir == env_dir / "res");
  unsetenv("TWISTLAB_OUT");
}

TEST_CASE("every shipped scenario parses and validates") {
  const fs::path dir = TWISTLAB_SCENARIO_DIR;
  REQUIRE(fs::is_directory(dir));
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    INFO(entry.path().filename().string());
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    const Scenario sc = parse_scenario(ss.str());
    CHECK(sc.name == entry.path().stem().string());
  }
  CHECK(seen >= 9);
}
