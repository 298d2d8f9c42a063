#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "obslab/field_io.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("obslab_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("OBSLAB_THREADS");
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  fs::path write(const std::string& name, const json& j) const { return write(name, j.dump(2)); }

  // Runs the binary; stdout and stderr land in dir_/<log>.
  int run(const std::string& args, const std::string& log = "log.txt") const {
    const std::string cmd = std::string(OBSLAB_BINARY) + " " + args + " > " + (dir_ / log).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  fs::path dir_;
};

json one_d_config() {
  return json::parse(R"({
    "version": 1,
    "problem": {"grid": {"dimension": 1, "nodes": 257},
                "boundary": {"fixture": {"kind": "one_d", "a": 0.5}}}
  })");
}

json radial_config(int nodes) {
  json j = json::parse(R"({
    "version": 1,
    "problem": {"grid": {"dimension": 2},
                "boundary": {"fixture": {"kind": "radial", "a": 0.4}}},
    "diagnostics": {
      "growth": {"r_max": 0.3},
      "weiss": {"r_max": 0.3, "count": 5},
      "classify": {"expect": {"verdict": "regular"}}
    }
  })");
  j["problem"]["grid"]["nodes"] = nodes;
  return j;
}

TEST_F(Cli, SolveOneDimensionalWritesArtifacts) {
  const fs::path cfg = write("c.json", one_d_config());
  ASSERT_EQ(run("solve --config " + cfg.string() + " --out " + (dir_ / "out").string()), 0) << read(dir_ / "log.txt");
  const obslab::ScalarField u = obslab::read_field(dir_ / "out" / "solution.obsgrid");
  EXPECT_EQ(u.grid().nodes(0), 257u);
  const std::string hist = read(dir_ / "out" / "residual_history.csv");
  EXPECT_EQ(hist.rfind("iteration,residual,energy\n", 0), 0u);
  const json s = json::parse(read(dir_ / "out" / "solve.json"));
  EXPECT_TRUE(s["converged"].get<bool>());
  EXPECT_LE(s["final_residual"].get<double>(), 1e-8);
}

TEST_F(Cli, IterationLimitExitsTwoWithHistory) {
  json j = radial_config(129);
  j["solver"] = json{{"max_iterations", 1}};
  const fs::path cfg = write("c.json", j);
  EXPECT_EQ(run("solve --config " + cfg.string() + " --out " + (dir_ / "out").string()), 2);
  const std::string hist = read(dir_ / "out" / "residual_history.csv");
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 2);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "solution.obsgrid"));
  EXPECT_FALSE(read(dir_ / "log.txt").empty());
}

TEST_F(Cli, ConfigErrorsExitOne) {
  const std::string out = " --out " + (dir_ / "out").string();
  EXPECT_EQ(run("solve --config " + write("bad.json", std::string("{ not json")).string() + out), 1);

  json unknown = one_d_config();
  unknown["problem"]["colour"] = "blue";
  EXPECT_EQ(run("solve --config " + write("unknown.json", unknown).string() + out), 1);
  EXPECT_NE(read(dir_ / "log.txt").find("colour"), std::string::npos);

  json version = one_d_config();
  version["version"] = 2;
  EXPECT_EQ(run("solve --config " + write("version.json", version).string() + out), 1);

  json radii = radial_config(129);
  radii["diagnostics"]["weiss"] = json{{"radii", {0.2, 0.1}}};
  EXPECT_EQ(run("diagnose --config " + write("radii.json", radii).string() + out), 1);

  json kappa = radial_config(129);
  kappa["diagnostics"]["kappa"] = -1.0;
  EXPECT_EQ(run("diagnose --config " + write("kappa.json", kappa).string() + out), 1);

  EXPECT_EQ(run("solve" + out), 1);
  EXPECT_EQ(run("solve --config " + (dir_ / "missing.json").string()), 1);
  EXPECT_EQ(run("frobnicate --config " + write("ok.json", one_d_config()).string()), 1);
}

TEST_F(Cli, MalformedThreadsEnvironmentIsAConfigError) {
  const fs::path cfg = write("c.json", one_d_config());
  setenv("OBSLAB_THREADS", "many", 1);
  EXPECT_EQ(run("solve --config " + cfg.string() + " --out " + (dir_ / "out").string()), 1);
  // the flag takes precedence over the environment
  EXPECT_EQ(run("solve --threads 2 --config " + cfg.string() + " --out " + (dir_ / "out").string()), 0);
  unsetenv("OBSLAB_THREADS");
}

TEST_F(Cli, RadialPipelineIsAllRegular) {
  const fs::path cfg = write("c.json", radial_config(129));
  ASSERT_EQ(run("diagnose --threads 4 --config " + cfg.string() + " --out " + (dir_ / "out").string()), 0)
      << read(dir_ / "log.txt");
  const json r = json::parse(read(dir_ / "out" / "report.json"));
  const json& census = r["classification"]["census"];
  EXPECT_GT(census["total"].get<int>(), 0);
  EXPECT_EQ(census["regular"], census["total"]);
  EXPECT_TRUE(r["pass"].get<bool>());
  for (const char* f : {"growth.csv", "weiss_profiles.csv", "classification.csv", "field.pgm", "contact.pgm"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  EXPECT_EQ(read(dir_ / "out" / "weiss_profiles.csv").rfind("point,x,y,z,radius,value,delta,non_decreasing,", 0), 0u);
}

TEST_F(Cli, SingularLineFixtureCensus) {
  const json j = json::parse(R"({
    "version": 1,
    "problem": {"grid": {"dimension": 2, "nodes": 65},
                "boundary": {"fixture": {"kind": "polynomial", "diagonal": [1.0, 0.0]}}},
    "diagnostics": {"classify": {"boundary_margin": 8, "expect": {"verdict": "singular", "stratum": 1}}}
  })");
  const fs::path cfg = write("c.json", j);
  ASSERT_EQ(run("classify --threads 3 --config " + cfg.string() + " --out " + (dir_ / "out").string()), 0)
      << read(dir_ / "log.txt");
  const json r = json::parse(read(dir_ / "out" / "report.json"));
  const json& census = r["classification"]["census"];
  EXPECT_GT(census["total"].get<int>(), 0);
  EXPECT_EQ(census["singular"][1], census["total"]);
  // contact nodes of 1/2 x1^2 lie within sqrt(2 kappa) h = 2h of the line x1 = 0;
  // the fitted vertex carries a small fit error on top
  const std::string csv = read(dir_ / "out" / "classification.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_GE(cells.size(), 20u);
    EXPECT_LE(std::stod(cells[19]), 2.1 * (2.0 / 64.0));
    ++rows;
  }
  EXPECT_EQ(rows, census["total"].get<int>());
}

TEST_F(Cli, EmptyDiagnosticsFromSolutionFile) {
  const fs::path cfg = write("c.json", one_d_config());
  ASSERT_EQ(run("solve --config " + cfg.string() + " --out " + (dir_ / "solved").string()), 0);
  json j = one_d_config();
  j["solution_file"] = (dir_ / "solved" / "solution.obsgrid").string();
  ASSERT_EQ(run("diagnose --config " + write("d.json", j).string() + " --out " + (dir_ / "out").string()), 0)
      << read(dir_ / "log.txt");
  const json r = json::parse(read(dir_ / "out" / "report.json"));
  EXPECT_TRUE(r["checks"].empty());
  EXPECT_TRUE(r["pass"].get<bool>());
  EXPECT_EQ(r["solution"]["source"], "file");

  j["solution_file"] = (dir_ / "nowhere.obsgrid").string();
  EXPECT_EQ(run("diagnose --config " + write("m.json", j).string() + " --out " + (dir_ / "out").string()), 1);
}

TEST_F(Cli, DiagnoseIsDeterministic) {
  json j = radial_config(129);
  j["diagnostics"]["monneau"] = json::parse(R"({"centers": [[0.0, 0.0]], "radii": [0.15, 0.2, 0.3]})");
  const fs::path cfg = write("c.json", j);
  ASSERT_EQ(run("diagnose --threads 1 --config " + cfg.string() + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run("diagnose --threads 4 --config " + cfg.string() + " --out " + (dir_ / "b").string()), 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    const std::string ext = entry.path().extension().string();
    if (ext != ".csv" && ext != ".json") continue;
    EXPECT_EQ(read(entry.path()), read(dir_ / "b" / entry.path().filename())) << entry.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 6u);
}

TEST_F(Cli, ReportMergesAndFlagsFailures) {
  const fs::path cfg = write("c.json", radial_config(129));
  ASSERT_EQ(run("diagnose --config " + cfg.string() + " --out " + (dir_ / "a").string()), 0);
  const fs::path good = dir_ / "a" / "report.json";

  json merge = json{{"version", 1}, {"reports", {good.string()}}, {"output", {{"dir", (dir_ / "sum").string()}}}};
  EXPECT_EQ(run("report --config " + write("r.json", merge).string(), "report.txt"), 0);
  EXPECT_NE(read(dir_ / "report.txt").find("PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "sum" / "summary.json"));

  // inject a failure; the recorded pass flag no longer matches the numbers
  json bad = json::parse(read(good));
  bad["checks"][0]["value"] = bad["checks"][0]["comparison"] == "le" ? 1e9 : -1e9;
  const fs::path injected = write("injected.json", bad);
  merge["reports"] = {good.string(), injected.string()};
  EXPECT_EQ(run("report --config " + write("r2.json", merge).string(), "report2.txt"), 3);
  const std::string listing = read(dir_ / "report2.txt");
  const std::string expected = "FAIL  " + dir_.filename().string() + "/injected.json  " + bad["checks"][0]["id"].get<std::string>();
  EXPECT_NE(listing.find(expected), std::string::npos) << listing;

  merge["reports"] = json::array();
  EXPECT_EQ(run("report --config " + write("r3.json", merge).string()), 1);

  json old = json::parse(read(good));
  old["version"] = 0;
  merge["reports"] = {write("old.json", old).string()};
  EXPECT_EQ(run("report --config " + write("r4.json", merge).string()), 1);
}

TEST_F(Cli, GeneralFormWithParaboloidObstacle) {
  // height - |x|^2/4 has Laplacian -1, so u - obstacle solves the normalized problem
  const json j = json::parse(R"({
    "version": 1,
    "problem": {"form": "general", "grid": {"dimension": 2, "nodes": 33},
                "obstacle": {"fixture": {"kind": "paraboloid", "height": 0.1}},
                "boundary": {"constant": 0.0}},
    "diagnostics": {}
  })");
  ASSERT_EQ(run("diagnose --config " + write("c.json", j).string() + " --out " + (dir_ / "out").string()), 0)
      << read(dir_ / "log.txt");
  const json r = json::parse(read(dir_ / "out" / "report.json"));
  EXPECT_GT(r["contact"]["contact_nodes"].get<int>(), 0);
  EXPECT_TRUE(r["solution"]["converged"].get<bool>());
}

}  // namespace
