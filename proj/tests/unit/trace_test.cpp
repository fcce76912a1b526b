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

#include "faultline/trace.hpp"

#include <fstream>
#include <stdexcept>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "faultline/error.hpp"
#include "test_support.hpp"

namespace faultline {
namespace {

using nlohmann::json;

json sample_case() {
  return json::parse(R"({
    "question": "Q?", "ground_truth": 42, "final_answer": "41",
    "history": [
      {"name": "Planner", "role": "planner", "content": "Plan it."},
      {"name": "Coder", "content": "Code it."},
      {"name": "Checker", "role": "critic", "content": null}
    ],
    "mistake_agent": "Coder", "mistake_step": "1", "mistake_reason": "bug"
  })");
}

TEST(TraceTest, ParsesCaseWithCoercions) {
  LabeledCase c = parse_case(sample_case(), "c1", Subset::hand_crafted);
  EXPECT_EQ(c.trace.size(), 3u);
  EXPECT_EQ(c.trace.ground_truth, "42");
  EXPECT_EQ(c.trace.steps[1].role, "");
  EXPECT_EQ(c.trace.steps[2].content, "");
  EXPECT_EQ(c.gold.mistake_step, 1u);
  EXPECT_TRUE(validate_case(c).empty());
}

TEST(TraceTest, OneBasedIndexShiftsGold) {
  TraceParseOptions one{.index_base = 1};
  LabeledCase c = parse_case(sample_case(), "c1", Subset::hand_crafted, one);
  EXPECT_EQ(c.gold.mistake_step, 0u);
  json round = serialize_case(c, one);
  EXPECT_EQ(round["mistake_step"], 1);
  auto doc = sample_case();
  doc["mistake_step"] = 0;
  EXPECT_THROW(parse_case(doc, "c1", Subset::hand_crafted, one), ParseError);
}

TEST(TraceTest, ErrorsNameTheOffendingPath) {
  auto doc = sample_case();
  doc["history"][1].erase("name");
  try {
    parse_case(doc, "c1", Subset::hand_crafted);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.path(), "$.history[1].name");
  }
  doc = sample_case();
  doc["history"] = json::array();
  EXPECT_THROW(parse_case(doc, "c1", Subset::hand_crafted), ValidationError);
  doc = sample_case();
  doc["mistake_step"] = 1.5;
  EXPECT_THROW(parse_case(doc, "c1", Subset::hand_crafted), ParseError);
}

TEST(TraceTest, ValidationReportsBoundsAndUnknownAgent) {
  auto doc = sample_case();
  doc["mistake_step"] = 9;
  doc["mistake_agent"] = "Ghost";
  LabeledCase c = parse_case(doc, "c1", Subset::hand_crafted);
  auto problems = validate_case(c);
  ASSERT_EQ(problems.size(), 2u);
  EXPECT_NE(problems[0].find("step out of bounds"), std::string::npos);
  EXPECT_NE(problems[1].find("Ghost"), std::string::npos);
}

TEST(TraceTest, SerializeRoundTrips) {
  LabeledCase c = parse_case(sample_case(), "c1", Subset::algorithm_generated);
  LabeledCase back = parse_case(serialize_case(c), "c1", Subset::algorithm_generated);
  EXPECT_EQ(serialize_case(back), serialize_case(c));
}

TEST(TraceTest, LoadsSyntheticDatasetSorted) {
  auto root = testing::fixture_path("synthetic");
  Dataset hc = load_dataset(root, Subset::hand_crafted);
  Dataset ag = load_dataset(root, Subset::algorithm_generated);
  EXPECT_EQ(hc.cases.size(), 6u);
  EXPECT_EQ(ag.cases.size(), 4u);
  EXPECT_TRUE(hc.report.rejections.empty());
  EXPECT_EQ(hc.cases.front().case_id, "ha_00");
  EXPECT_EQ(ag.cases.back().case_id, "al_03");
}

TEST(TraceTest, LoaderRejectsBadFilesAndDuplicates) {
  testing::TempDir dir;
  namespace fs = std::filesystem;
  fs::create_directories(dir.path() / "hand_crafted");
  fs::create_directories(dir.path() / "Hand-Crafted");
  auto write = [&](const fs::path& p, const std::string& s) {
    std::ofstream(dir.path() / p) << s;
  };
  write("hand_crafted/a.json", sample_case().dump());
  write("Hand-Crafted/a.json", sample_case().dump());
  write("hand_crafted/b.json", "{not json");
  Dataset ds = load_dataset(dir.path(), Subset::hand_crafted);
  EXPECT_EQ(ds.cases.size(), 1u);
  EXPECT_EQ(ds.report.rejections.size(), 2u);
  EXPECT_THROW(load_dataset(dir.path() / "missing", Subset::hand_crafted),
               std::invalid_argument);
}

TEST(TraceTest, SubsetNames) {
  EXPECT_EQ(parse_subset("Algorithm-Generated"), Subset::algorithm_generated);
  EXPECT_EQ(to_string(Subset::hand_crafted), "hand_crafted");
  EXPECT_THROW(parse_subset("other"), std::invalid_argument);
}

}  // namespace
}  // namespace faultline
