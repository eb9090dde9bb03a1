#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "podlrom/snapshots.hpp"
#include "test_support.hpp"

using podlrom::testutil::TempDir;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "podlrom");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = podlrom::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string small_config(const std::string& training) {
  return R"({
  "pulse1d": {"grid_points": 64, "mu_min": 0.2, "mu_max": 0.5},
  "sampling": {"axes": [{"min": 0.2, "max": 0.5, "count": 6}], "time": {"count": 10, "every": 1}},
  "test_sampling": {"axes": [{"min": 0.25, "max": 0.45, "count": 3}], "time": {"count": 10, "every": 1}},
  "architecture": {"latent": 2, "kernel": 3, "filters": [2, 4], "dfnn_width": 8, "dfnn_depth": 1},
  "training": )" + training + "\n}\n";
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, QuickstartPipelineRuns) {
  TempDir dir("cli_quick");
  const auto cfg = (dir / "run.json").string();
  write(cfg, small_config(R"({"batch_size": 8, "max_epochs": 5})"));
  const auto d = [&](const char* name) { return (dir / name).string(); };
  ASSERT_EQ(cli({"gen", "--problem", "pulse1d", "--config", cfg, "--out", d("train.pdrs")}).code, 0);
  ASSERT_EQ(cli({"gen", "--problem", "pulse1d", "--config", cfg, "--split", "test", "--out", d("test.pdrs")}).code, 0);
  ASSERT_EQ(cli({"rsvd", "--in", d("train.pdrs"), "--n", "4", "--oversampling", "2", "--out", d("b.pdrb")}).code, 0);
  const Result tr = cli({"train", "--snaps", d("train.pdrs"), "--basis", d("b.pdrb"), "--config", cfg, "--out",
                         d("m.pdrc")});
  ASSERT_EQ(tr.code, 0) << tr.err;
  const Result inf = cli({"infer", "--ckpt", d("m.pdrc"), "--basis", d("b.pdrb"), "--params", d("test.pdrs"), "--out",
                          d("pred.pdrs")});
  ASSERT_EQ(inf.code, 0) << inf.err;
  const Result ev = cli({"eval", "--truth", d("test.pdrs"), "--approx", d("pred.pdrs"), "--out", d("err.csv")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(slurp(d("err.csv")).substr(0, 9), "instance,");
  const auto pred = podlrom::read_pdrs(d("pred.pdrs"));
  EXPECT_EQ(pred.samples(), 30u);
  const std::string manifest = slurp(d("m.pdrc") + ".manifest.json");
  EXPECT_NE(manifest.find("\"status\": \"ok\""), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("\"config_hash\""), std::string::npos);
}

TEST(Cli, DefaultSeedIsRecorded) {
  TempDir dir("cli_seed");
  const auto cfg = (dir / "run.json").string();
  write(cfg, small_config(R"({"batch_size": 8, "max_epochs": 2})"));
  const auto out = (dir / "s.pdrs").string();
  ASSERT_EQ(cli({"gen", "--problem", "pulse1d", "--config", cfg, "--out", out}).code, 0);
  const std::string manifest = slurp(out + ".manifest.json");
  EXPECT_NE(manifest.find("\"seed\": 0"), std::string::npos) << manifest;
}

TEST(Cli, MissingInputExitsTwoAndNamesPath) {
  TempDir dir("cli_missing");
  const auto out = (dir / "b.pdrb").string();
  const Result r = cli({"rsvd", "--in", (dir / "absent.pdrs").string(), "--out", out});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("absent.pdrs"), std::string::npos) << r.err;
  const std::string manifest = slurp(out + ".manifest.json");
  EXPECT_NE(manifest.find("\"status\": \"error\""), std::string::npos) << manifest;
}

TEST(Cli, UnknownConfigKeyExitsTwo) {
  TempDir dir("cli_key");
  const auto cfg = (dir / "run.json").string();
  write(cfg, small_config(R"({"batch_size": 8, "max_epoch": 2})"));
  const Result r = cli({"gen", "--problem", "pulse1d", "--config", cfg, "--out", (dir / "s.pdrs").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("training.max_epoch"), std::string::npos) << r.err;
}

TEST(Cli, DivergenceExitsOneWithManifest) {
  TempDir dir("cli_diverge");
  const auto cfg = (dir / "run.json").string();
  write(cfg, small_config(R"({"batch_size": 8, "max_epochs": 5, "learning_rate": 1e200})"));
  const auto d = [&](const char* name) { return (dir / name).string(); };
  ASSERT_EQ(cli({"gen", "--problem", "pulse1d", "--config", cfg, "--out", d("train.pdrs")}).code, 0);
  ASSERT_EQ(cli({"rsvd", "--in", d("train.pdrs"), "--n", "4", "--oversampling", "2", "--out", d("b.pdrb")}).code, 0);
  const Result r = cli({"train", "--snaps", d("train.pdrs"), "--basis", d("b.pdrb"), "--config", cfg, "--out",
                        d("m.pdrc")});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_FALSE(std::filesystem::exists(d("m.pdrc")));
  const std::string manifest = slurp(d("m.pdrc") + ".manifest.json");
  EXPECT_NE(manifest.find("\"status\": \"error\""), std::string::npos) << manifest;
}

TEST(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(cli({"rsvd"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"gen", "--problem", "heat", "--config", "x.json", "--out", "y"}).code, 2);
}

TEST(Cli, HelpListsSubcommandsAndFlags) {
  const Result top = cli({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* s : {"gen", "rsvd", "train", "infer", "eval", "study-n", "study-ntrain", "bench"})
    EXPECT_NE(top.out.find(s), std::string::npos) << s;
  const Result train = cli({"train", "--help"});
  EXPECT_EQ(train.code, 0);
  for (const char* f : {"--snaps", "--basis", "--config", "--warm-start", "--seed", "--out"})
    EXPECT_NE(train.out.find(f), std::string::npos) << f;
}

TEST(Cli, ShippedConfigParses) {
  TempDir dir("cli_cfg");
  const auto out = (dir / "t.pdrs").string();
  const Result r =
      cli({"gen", "--problem", "pulse1d", "--config", PODLROM_CONFIG_DIR "/pulse1d_quickstart.json", "--split", "test",
           "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(podlrom::read_pdrs(out).samples(), 19u * 50u);
}
