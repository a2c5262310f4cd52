#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include "loopsum/report.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  std::string cmd = std::string(LOOPSUM_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) r.out.append(buf.data(), n);
  int status = pclose(f);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string corpus(const std::string& name) { return std::string(LOOPSUM_CORPUS_DIR) + "/" + name; }

}  // namespace

TEST(Cli, SummarizeFig3) {
  auto r = cli("summarize " + corpus("fig3.wl"));
  ASSERT_EQ(r.code, 0);
  auto j = loopsum::Json::parse(r.out);
  ASSERT_EQ(j["loops"].size(), 1u);
  EXPECT_EQ(j["loops"][0]["status"], "SUCCESS");
  EXPECT_FALSE(j["loops"][0]["cases"].empty());
}

TEST(Cli, EmptyProgramHasNoLoops) {
  auto r = cli("summarize " + corpus("empty.wl"));
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(loopsum::Json::parse(r.out)["loops"].empty());
}

TEST(Cli, SummaryFailureExitsOne) {
  auto r = cli("summarize " + corpus("t30.wl"));
  EXPECT_EQ(r.code, 1);
  auto j = loopsum::Json::parse(r.out);
  EXPECT_EQ(j["loops"][0]["status"], "COUPLED_RECURRENCE");
}

TEST(Cli, OracleDiffFig1c) {
  auto r = cli("oracle-diff --inputs 300 " + corpus("fig1c.wl"));
  ASSERT_EQ(r.code, 0);
  auto j = loopsum::Json::parse(r.out);
  EXPECT_EQ(j["summary"], "SUCCESS");
  EXPECT_EQ(j["diff"]["match_rate"], 1.0);
}

TEST(Cli, VerifyPrintsVerdicts) {
  auto ok = cli("verify " + corpus("verify/inc_bound.wl"));
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("HOLDS"), std::string::npos);
  auto bad = cli("verify " + corpus("verify/step3_skip.wl"));
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("VIOLATED"), std::string::npos);
}

TEST(Cli, DumpsAreDot) {
  auto r = cli("dump-cfg " + corpus("fig3.wl"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("digraph"), std::string::npos);
  auto c = cli("dump-csg " + corpus("fig3.wl"));
  ASSERT_EQ(c.code, 0);
  EXPECT_NE(c.out.find("digraph"), std::string::npos);
  EXPECT_EQ(cli("dump-spaths " + corpus("fig3.wl")).code, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate " + corpus("fig3.wl")).code, 2);
  EXPECT_EQ(cli("summarize /nonexistent/file.wl").code, 2);
  EXPECT_EQ(cli("summarize --backend nope " + corpus("fig3.wl")).code, 2);
}

TEST(Cli, ParseErrorExitsTwo) {
  std::string path = testing::TempDir() + "bad.wl";
  FILE* f = fopen(path.c_str(), "w");
  ASSERT_NE(f, nullptr);
  fputs("while (x < ) {\n", f);
  fclose(f);
  EXPECT_EQ(cli("summarize " + path).code, 2);
}

TEST(Cli, OutputIsDeterministic) {
  for (const auto& args : {"summarize " + corpus("fig1c.wl"), "oracle-diff --seed 3 --inputs 200 " + corpus("fig1d.wl")}) {
    auto a = cli(args);
    auto b = cli(args);
    EXPECT_EQ(a.out, b.out) << args;
  }
}

TEST(Cli, JsonOutMatchesStdout) {
  std::string path = testing::TempDir() + "fig3.json";
  auto r = cli("summarize --json-out " + path + " " + corpus("fig3.wl"));
  ASSERT_EQ(r.code, 0);
  FILE* f = fopen(path.c_str(), "r");
  ASSERT_NE(f, nullptr);
  std::string body;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) body.append(buf.data(), n);
  fclose(f);
  EXPECT_EQ(body, r.out);
}
