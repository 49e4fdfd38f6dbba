#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "situ/error.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("situ_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string("\"") + SITU_CLI_PATH + "\" " + args + " >\"" +
                            (dir_ / "out.log").string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string log() const {
    std::ifstream in(dir_ / "out.log");
    return {std::istreambuf_iterator<char>(in), {}};
  }

  nlohmann::json json_at(const fs::path& p) const {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
  }

  std::string p(const std::string& rel) const { return "\"" + (dir_ / rel).string() + "\""; }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("gen-scenes --out " + p("x")), 2);  // --count missing
  EXPECT_EQ(run("--threads 0 gen-scenes --count 1 --out " + p("x")), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, GenScenesRejectsZeroCountAndStillWritesManifest) {
  EXPECT_EQ(run("gen-scenes --count 0 --out " + p("data")), 2);
  const auto m = json_at(dir_ / "data/manifest.json");
  EXPECT_EQ(m.at("status"), "failed");
  EXPECT_EQ(m.at("exit_code"), 2);
  EXPECT_FALSE(m.at("error").get<std::string>().empty());
}

TEST_F(Cli, EndToEnd) {
  ASSERT_EQ(run("gen-scenes --count 3 --seed 5 --out " + p("data")), 0) << log();
  for (const char* sub : {"scenes", "trajectories", "depth", "cues"}) {
    EXPECT_TRUE(fs::is_directory(dir_ / "data" / sub)) << sub;
  }
  const auto gm = json_at(dir_ / "data/manifest.json");
  EXPECT_EQ(gm.at("status"), "ok");
  EXPECT_EQ(gm.at("seed"), 5);
  EXPECT_FALSE(gm.at("outputs").empty());

  ASSERT_EQ(run("build-dataset --scenes " + p("data") + " --out " + p("ds") + " --verify"), 0) << log();
  EXPECT_TRUE(fs::exists(dir_ / "ds/records.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "ds/stats.json"));

  ASSERT_EQ(run("train --dataset " + p("data") + " --out " + p("model") + " --epochs 2"), 0) << log();
  EXPECT_TRUE(fs::exists(dir_ / "model/params.bin"));
  std::ifstream hist(dir_ / "model/loss_history.csv");
  std::string header;
  std::getline(hist, header);
  EXPECT_EQ(header, "epoch,L_pos,L_rot,L_conf,total");

  ASSERT_EQ(run("eval --params " + p("model/params.bin") + " --dataset " + p("data") + " --report " +
                p("report.json") + " --with-baseline"),
            0)
      << log();
  const auto report = json_at(dir_ / "report.json");
  ASSERT_EQ(report.at("rows").size(), 2u);
  EXPECT_EQ(report.at("rows")[1].at("method"), "random");
  EXPECT_NE(log().find("Acc@1.0m"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "report.json.manifest.json"));
}

TEST_F(Cli, BuildDatasetProviderUnreachable) {
  ASSERT_EQ(run("gen-scenes --count 2 --out " + p("data")), 0) << log();
  const std::string url = " --provider-url http://127.0.0.1:9 --timeout-ms 200 --retries 0";
  EXPECT_EQ(run("build-dataset --scenes " + p("data") + " --out " + p("strict") + url + " --strict"), 2);
  EXPECT_NE(log().find("--strict"), std::string::npos);

  ASSERT_EQ(run("build-dataset --scenes " + p("data") + " --out " + p("lenient") + url), 0) << log();
  std::ifstream in(dir_ / "lenient/records.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_TRUE(nlohmann::json::parse(line).at("caption_missing").get<bool>());
    ++n;
  }
  EXPECT_GT(n, 0);
  EXPECT_EQ(json_at(dir_ / "lenient/manifest.json").at("summary").at("degraded"), n);
}

TEST_F(Cli, BuildDatasetMissingInput) {
  EXPECT_EQ(run("build-dataset --scenes " + p("nowhere") + " --out " + p("ds")), 2);
}

TEST_F(Cli, TrainBadConfig) {
  ASSERT_EQ(run("gen-scenes --count 1 --out " + p("data")), 0) << log();
  std::ofstream(dir_ / "cfg.json") << R"({"D": 1.5, "learning_rte": 0.1})";
  EXPECT_EQ(run("train --dataset " + p("data") + " --config " + p("cfg.json") + " --out " + p("m")), 2);
  EXPECT_NE(log().find("learning_rte"), std::string::npos);
  std::ofstream(dir_ / "cfg2.json") << R"({"B": 0})";
  EXPECT_EQ(run("train --dataset " + p("data") + " --config " + p("cfg2.json") + " --out " + p("m")), 2);
}

TEST_F(Cli, EvalBadParams) {
  ASSERT_EQ(run("gen-scenes --count 1 --out " + p("data")), 0) << log();
  EXPECT_EQ(run("eval --params " + p("missing.bin") + " --dataset " + p("data") + " --report " + p("r.json")), 2);
  ASSERT_EQ(run("train --dataset " + p("data") + " --out " + p("m") + " --epochs 1"), 0) << log();
  {
    std::fstream f(dir_ / "m/params.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(16);
    const char patched[4] = {7, 0, 0, 0};
    f.write(patched, 4);
  }
  EXPECT_EQ(run("eval --params " + p("m/params.bin") + " --dataset " + p("data") + " --report " + p("r.json")), 2);
}

TEST(GitBlobSha1, KnownValues) {
  const fs::path f = fs::temp_directory_path() / ("situ_blob_" + std::to_string(::getpid()));
  std::ofstream(f, std::ios::binary) << "hello\n";
  EXPECT_EQ(situ::cli::git_blob_sha1(f), "ce013625030ba8dba906f756967f9e9ca394464a");
  std::ofstream(f, std::ios::binary | std::ios::trunc);
  EXPECT_EQ(situ::cli::git_blob_sha1(f), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  fs::remove(f);
}

TEST(RunManifest, ExceptionMapping) {
  const fs::path path = fs::temp_directory_path() / ("situ_manifest_" + std::to_string(::getpid()) + ".json");
  using situ::cli::RunManifest;
  const auto code = [&](auto thrower) {
    RunManifest m("test", path);
    return situ::cli::run_with_manifest(m, thrower);
  };
  EXPECT_EQ(code([] {}), 0);
  EXPECT_EQ(code([] { throw situ::cli::UsageError("x"); }), 2);
  EXPECT_EQ(code([] { throw situ::ConfigError("x"); }), 2);
  EXPECT_EQ(code([] { throw situ::ParseError("x", 3); }), 2);
  EXPECT_EQ(code([] { throw situ::DimensionMismatch("x"); }), 2);
  EXPECT_EQ(code([] { throw std::runtime_error("x"); }), 1);
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("exit_code"), 1);
  EXPECT_EQ(j.at("subcommand"), "test");
  fs::remove(path);
}
