// Copyright 2026 The Faultline Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_support.hpp"

namespace faultline::cli {
namespace {

using nlohmann::json;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
  std::ostringstream out, err;
  EnvLookup lookup = [env](std::string_view name) -> std::optional<std::string> {
    auto it = env.find(std::string(name));
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  Run r;
  r.code = run_cli(args, out, err, lookup);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string trace_file() {
  return testing::fixture_path("synthetic/hand_crafted/ha_00.json").string();
}

std::string rules_file() { return testing::fixture_path("mock_rules.json").string(); }

TEST(CliTest, HelpExitsZero) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("attribute"), std::string::npos);
}

TEST(CliTest, AttributeWithMockProvider) {
  auto r = run({"attribute", trace_file(), "--provider", "mock", "--script", rules_file()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("Agent: WebSurfer"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Step: 1"), std::string::npos) << r.out;
}

TEST(CliTest, JsonOutputCarriesManifest) {
  auto r = run({"attribute", trace_file(), "--provider", "mock", "--script", rules_file(),
                "--format", "json", "--phase", "unified", "--panel-size", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  json doc = json::parse(r.out);
  EXPECT_EQ(doc["attribution"]["mistake_agent"], "WebSurfer");
  EXPECT_EQ(doc["attribution"]["calls"], 2);
  EXPECT_EQ(doc["run_manifest"]["config"]["panel_size"], 2);
}

TEST(CliTest, BaselineStrategyOnOneTrace) {
  auto r = run({"attribute", trace_file(), "--provider", "mock", "--script", rules_file(),
                "--strategies", "binary_search"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("Step: 0"), std::string::npos) << r.out;
}

TEST(CliTest, InputErrorsExitTwo) {
  EXPECT_EQ(run({"attribute", "/no/such/trace.json", "--provider", "mock", "--script",
                 rules_file()})
                .code,
            kExitInput);
  EXPECT_EQ(run({"attribute", trace_file(), "--bogus-flag"}).code, kExitInput);
  EXPECT_EQ(run({}).code, kExitInput);
  EXPECT_EQ(run({"attribute", trace_file(), "--provider", "mock", "--script", rules_file(),
                 "--panel-size", "9"})
                .code,
            kExitInput);
  EXPECT_EQ(run({"attribute", trace_file(), "--provider", "carrier-pigeon"}).code,
            kExitInput);
}

TEST(CliTest, ProviderErrorsExitThree) {
  testing::TempDir dir;
  auto rules = dir.path() / "empty_rules.json";
  std::ofstream(rules) << R"({"rules": []})";
  auto r = run({"attribute", trace_file(), "--provider", "mock", "--script", rules.string(),
                "--strategies", "all_at_once"});
  EXPECT_EQ(r.code, kExitProvider) << r.err;
}

TEST(CliTest, ReplayMissExitsFourAndNamesDigests) {
  testing::TempDir dir;
  auto r = run({"replay", "attribute", trace_file(), "--store", dir.path().string(),
                "--phase", "unified", "--panel-size", "1"});
  EXPECT_EQ(r.code, kExitFixtureMiss);
  EXPECT_NE(r.err.find("no recorded fixture"), std::string::npos) << r.err;
}

TEST(CliTest, RecordThenReplayIsIdentical) {
  testing::TempDir dir;
  const std::string store = (dir.path() / "store").string();
  auto rec = run({"record", "attribute", trace_file(), "--provider", "mock", "--script",
                  rules_file(), "--store", store, "--format", "json"});
  ASSERT_EQ(rec.code, kExitOk) << rec.err;
  auto rep = run({"replay", "attribute", trace_file(), "--store", store, "--format", "json"});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_EQ(rec.out, rep.out);
  auto list = run({"record", "--list", "--store", store});
  EXPECT_EQ(list.code, kExitOk);
  EXPECT_EQ(std::count(list.out.begin(), list.out.end(), '\n'), 6);
}

TEST(CliTest, SettingsPrecedenceFlagEnvFileDefault) {
  testing::TempDir dir;
  auto cfg = dir.path() / "cfg.json";
  std::ofstream(cfg) << R"({"seed": 11, "panel_size": 4, "threshold": 0.5})";
  auto r = run({"attribute", trace_file(), "--provider", "mock", "--script", rules_file(),
                "--config", cfg.string(), "--panel-size", "2", "--explain"},
               {{"FAULTLINE_SEED", "12"}});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.err.find("panel_size"), std::string::npos);
  EXPECT_NE(r.err.find("2  [flag:--panel-size]"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("12  [env:FAULTLINE_SEED]"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("0.5  [file:" + cfg.string() + "]"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("decoupled  [default]"), std::string::npos) << r.err;

  std::ofstream(cfg) << R"({"nonsense": 1})";
  EXPECT_EQ(run({"attribute", trace_file(), "--config", cfg.string()}).code, kExitInput);
}

TEST(CliTest, EvaluateWritesRunDirectory) {
  testing::TempDir dir;
  const auto run_dir = dir.path() / "run";
  auto r = run({"evaluate", testing::fixture_path("synthetic").string(), "--provider", "mock",
                "--script", rules_file(), "--strategies", "all_at_once,step_by_step",
                "--run-dir", run_dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("all_at_once"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(run_dir / "reports.json"));
  json reports = json::parse(testing::read_file(run_dir / "reports.json"));
  EXPECT_EQ(reports["reports"].size(), 2u * 2u * 2u);
}

}  // namespace
}  // namespace faultline::cli
