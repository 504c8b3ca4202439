#include <fstream>
#include <sstream>

#include "doctest.h"
#include "emx/cli.hpp"
#include "emx/csv.hpp"
#include "support.hpp"

using namespace emx;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string str(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("flag names follow config keys") {
  CHECK(cli::flag_of("window.start") == "--window-start");
  CHECK(cli::flag_of("region.min_n") == "--region-min-n");
  CHECK(cli::flag_of("co2.max_depth") == "--co2-max-depth");
  const auto keys = cli::config_keys();
  CHECK(std::find(keys.begin(), keys.end(), "seed") != keys.end());
}

TEST_CASE("usage errors") {
  auto r = run({"synth", "--out", "/tmp/x", "--bogus", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error code=usage message=\"", 0) == 0);
  r = run({});
  CHECK(r.code == 2);
  r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("export-dot") != std::string::npos);
  r = run({"synth", "--out", str(emx::testing::temp_dir("cli_noseed"))});
  CHECK(r.code == 3);
  CHECK(r.err.find("seed") != std::string::npos);
  r = run({"export-dot", "--model", "/nonexistent/tree.json"});
  CHECK(r.code == 9);
  CHECK(r.err.rfind("error code=not_found", 0) == 0);
  r = run({"qc", "--inspections", "/nonexistent.csv", "--out", "/tmp"});
  CHECK(r.code == 9);
  r = run({"synth", "--seed", "x1", "--out", "/tmp/emx_never"});
  CHECK(r.code == 3);
}

TEST_CASE("export-dot of the example tree") {
  const auto r = run({"export-dot", "--model", std::string(EMX_DATA_DIR) + "/example_mpg_tree.json"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("digraph tree {", 0) == 0);
  CHECK(r.out.find("Year >= 2019") != std::string::npos);
}

TEST_CASE("synth is reproducible and config files are honoured") {
  const auto dir = emx::testing::temp_dir("cli_synth");
  const std::vector<std::string> base = {"--seed", "5", "--vehicles", "1500", "--regions", "12"};
  auto args = base;
  args.insert(args.begin(), "synth");
  for (const char* sub : {"a", "b"}) {
    auto a = args;
    a.insert(a.end(), {"--out", str(dir / sub)});
    REQUIRE(run(a).code == 0);
  }
  CHECK(emx::testing::read_file(dir / "a" / "inspections.csv") ==
        emx::testing::read_file(dir / "b" / "inspections.csv"));

  {
    std::ofstream config(dir / "config.json");
    config << R"({"seed": 5, "vehicles": 1500, "regions": 12})";
  }
  REQUIRE(run({"synth", "--config", str(dir / "config.json"), "--out", str(dir / "c")}).code == 0);
  CHECK(emx::testing::read_file(dir / "a" / "manifest.json") ==
        emx::testing::read_file(dir / "c" / "manifest.json"));
  REQUIRE(run({"synth", "--config", str(dir / "config.json"), "--seed", "6", "--out",
               str(dir / "d")}).code == 0);
  CHECK(emx::testing::read_file(dir / "a" / "manifest.json") !=
        emx::testing::read_file(dir / "d" / "manifest.json"));

  {
    std::ofstream config(dir / "bad.json");
    config << R"({"seed": 5, "colour": "red"})";
  }
  CHECK(run({"synth", "--config", str(dir / "bad.json"), "--out", str(dir / "e")}).code == 3);
  {
    std::ofstream config(dir / "broken.json");
    config << "{";
  }
  CHECK(run({"synth", "--config", str(dir / "broken.json"), "--out", str(dir / "e")}).code == 4);
}

TEST_CASE("stage by stage on a noise-free corpus") {
  const auto dir = emx::testing::temp_dir("cli_stages");
  const auto seed = std::vector<std::string>{"--seed", "9"};
  const auto go = [&](std::vector<std::string> args) {
    args.insert(args.end(), seed.begin(), seed.end());
    const auto r = run(args);
    INFO(r.err);
    REQUIRE(r.code == 0);
    return r;
  };
  go({"synth", "--vehicles", "6000", "--regions", "20", "--noise-sigma", "0", "--out",
      str(dir / "corpus")});
  go({"qc", "--inspections", str(dir / "corpus" / "inspections.csv"), "--out", str(dir / "qc")});
  const auto clean = str(dir / "qc" / "clean_inspections.csv");
  const auto certs = str(dir / "corpus" / "certifications.csv");
  go({"train", "--inspections", clean, "--certifications", certs, "--xval", "5", "--out",
      str(dir / "models")});
  go({"validate", "--inspections", clean, "--certifications", certs, "--models",
      str(dir / "models"), "--out", str(dir / "validate")});
  go({"impute", "--inspections", clean, "--models", str(dir / "models"), "--out",
      str(dir / "impute")});
  go({"aggregate", "--inspections", clean, "--imputed", str(dir / "impute" / "imputed.csv"),
      "--out", str(dir / "agg")});
  const auto report = run({"report", "--dir", str(dir / "agg")});
  CHECK(report.code == 0);
  CHECK(report.out.find("# fleet_summary.csv") != std::string::npos);

  std::ifstream cp(dir / "models" / "co2_cp_table.csv");
  csv::Reader reader(cp);
  std::vector<std::string> row, last;
  REQUIRE(reader.next(row));
  CHECK(row[3] == "xerror");
  while (reader.next(row)) last = row;
  REQUIRE(last.size() == 5);
  CHECK(std::stod(last[3]) < 0.01);

  // Exported minus scrapped CO2, as a share of the scrapped mean.
  std::ifstream summary(dir / "agg" / "fleet_summary.csv");
  csv::Reader sr(summary);
  double gap = -1.0;
  while (sr.next(row)) {
    if (row[0] == "exported" && row[1] == "co2") gap = std::stod(row[10]);
  }
  CHECK(gap == doctest::Approx(13.0).epsilon(0.1));

  const auto missing = run({"impute", "--inspections", clean, "--models", str(dir / "nowhere"),
                            "--out", str(dir / "x")});
  CHECK(missing.code == 9);
  const auto measured = run({"impute", "--inspections", clean, "--models", str(dir / "models"),
                             "--policy", "prefer-measured", "--out", str(dir / "x")});
  CHECK(measured.code == 3);
}
