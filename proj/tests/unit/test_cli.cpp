#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "mfsync/harness/cli.hpp"

using namespace mfsync::harness;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mfsync");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kGolden = std::string(MFSYNC_TEST_DATA) + "/golden/";

}  // namespace

TEST(Cli, Version) {
  const auto r = cli({"version"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "mfsync 1.0.0\n");
}

TEST(Cli, DemoIsDeterministic) {
  const auto a = cli({"demo", "--seed", "7", "--n", "40", "--k-max", "4", "--lambda", "2"});
  const auto b = cli({"demo", "--seed", "7", "--n", "40", "--k-max", "4", "--lambda", "2"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  for (const char* name : {"spectral", "gpm", "ppe_spc", "mfgpm"}) EXPECT_NE(a.out.find(name), std::string::npos);
  const auto c = cli({"demo", "--seed", "8", "--n", "40", "--k-max", "4", "--lambda", "2"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, ParseAndConfigErrorsExitOne) {
  EXPECT_EQ(cli({}).code, kExitConfig);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(cli({"sweep"}).code, kExitConfig);
  EXPECT_EQ(cli({"demo", "--noise", "laplace"}).code, kExitConfig);
  EXPECT_EQ(cli({"demo", "--n", "100", "--lambda", "20"}).code, kExitConfig);
  const auto missing = cli({"validate-config", "--config", "/nonexistent.yaml"});
  EXPECT_EQ(missing.code, kExitConfig);
  const auto bad = cli({"validate-config", "--config", std::string(MFSYNC_TEST_DATA) + "/cli/malformed.yaml"});
  EXPECT_EQ(bad.code, kExitConfig);
  EXPECT_NE(bad.err.find("malformed.yaml:10:"), std::string::npos) << bad.err;
  // Group mismatch between command and config.
  EXPECT_EQ(cli({"so3-sweep", "--config", kGolden + "small_sweep.yaml"}).code, kExitConfig);
  EXPECT_EQ(cli({"sweep", "--config", kGolden + "small_sweep.yaml", "--trials", "0"}).code, kExitConfig);
}

TEST(Cli, ValidateShippedConfigs) {
  for (const auto& entry : fs::directory_iterator(MFSYNC_CONFIG_DIR)) {
    const auto r = cli({"validate-config", "--config", entry.path().string()});
    EXPECT_EQ(r.code, kExitOk) << entry.path() << ": " << r.err;
  }
}

TEST(Cli, SweepWritesArtifacts) {
  const fs::path dir = fs::temp_directory_path() / "mfsync_cli_sweep";
  fs::remove_all(dir);
  const auto r = cli({"sweep", "--config", kGolden + "small_sweep.yaml", "--out", dir.string(), "--threads", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "results.csv"));
  EXPECT_TRUE(fs::exists(dir / "config.yaml"));
  for (const char* label : {"spectral", "gpm", "ppe_spc", "ppe_spc3", "mfgpm"})
    EXPECT_TRUE(fs::exists(dir / ("heatmap_" + std::string(label) + ".svg"))) << label;
  // The resolved config reproduces the run.
  const fs::path again = fs::temp_directory_path() / "mfsync_cli_sweep_again";
  fs::remove_all(again);
  ASSERT_EQ(cli({"sweep", "--config", (dir / "config.yaml").string(), "--out", again.string()}).code, kExitOk);
  std::ifstream a(dir / "results.csv"), b(again / "results.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Cli, SeedOverrideChangesResults) {
  const fs::path d1 = fs::temp_directory_path() / "mfsync_cli_seed1";
  const fs::path d2 = fs::temp_directory_path() / "mfsync_cli_seed2";
  ASSERT_EQ(cli({"sweep", "--config", kGolden + "small_sweep.yaml", "--out", d1.string(), "--trials", "1"}).code, kExitOk);
  ASSERT_EQ(cli({"sweep", "--config", kGolden + "small_sweep.yaml", "--out", d2.string(), "--trials", "1", "--seed",
                 "5"}).code,
            kExitOk);
  std::ifstream a(d1 / "results.csv"), b(d2 / "results.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_NE(sa.str(), sb.str());
}

TEST(Cli, RuntimeFailureExitsTwo) {
  const auto r = cli({"sweep", "--config", kGolden + "small_sweep.yaml", "--out", "/proc/mfsync_cannot_write"});
  EXPECT_EQ(r.code, kExitRuntime) << r.err;
}
