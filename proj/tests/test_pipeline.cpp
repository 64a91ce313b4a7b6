/*
 * Copyright 2026 the vreid authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "vreid/io.hpp"
#include "vreid/pipeline.hpp"

using namespace vreid;
using testutil::TempDir;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RankedResult identity_result(std::size_t n_gallery, std::size_t list_len) {
  RankedResult r;
  r.query_ids = {"q0"};
  for (std::size_t g = 0; g < n_gallery; ++g) {
    r.gallery_ids.push_back("g" + std::to_string(g));
  }
  r.ranks.resize(1);
  for (std::size_t g = 0; g < list_len; ++g) {
    r.ranks[0].push_back(static_cast<std::uint32_t>(g));
  }
  return r;
}

}  // namespace

TEST_CASE("identity ranking over 100 items writes the line 1..100") {
  TempDir dir("submit_identity");
  auto r = identity_result(100, 100);
  write_submission(r, dir.file("sub.txt"));
  std::string expect;
  for (int i = 1; i <= 100; ++i) {
    if (i > 1) expect += ' ';
    expect += std::to_string(i);
  }
  expect += '\n';
  CHECK(slurp(dir.file("sub.txt")) == expect);
}

TEST_CASE("a 99-entry list is padded with the best unused index") {
  TempDir dir("submit_pad");
  auto r = identity_result(100, 100);
  r.ranks[0].erase(r.ranks[0].begin() + 42);  // drop one entry -> 99 left
  write_submission(r, dir.file("sub.txt"));
  auto lists = load_rank_file(dir.file("sub.txt"), 100);
  REQUIRE(lists.size() == 1);
  REQUIRE(lists[0].size() == 100);
  CHECK(lists[0].back() == 42);  // the dropped index returns as padding
}

TEST_CASE("submission round trip reproduces the ranked lists") {
  TempDir dir("submit_roundtrip");
  RankedResult r;
  r.query_ids = {"q0", "q1"};
  for (std::size_t g = 0; g < 150; ++g) {
    r.gallery_ids.push_back("g" + std::to_string(g));
  }
  r.ranks = {{}, {}};
  for (std::uint32_t g = 0; g < 100; ++g) {
    r.ranks[0].push_back(149 - g);
    r.ranks[1].push_back(g);
  }
  write_submission(r, dir.file("sub.txt"));
  CHECK(load_rank_file(dir.file("sub.txt"), 150) == r.ranks);
}

TEST_CASE("duplicate indices in a ranked list are an integrity error") {
  TempDir dir("submit_dup");
  auto r = identity_result(100, 100);
  r.ranks[0][5] = r.ranks[0][4];
  CHECK_THROWS_AS(write_submission(r, dir.file("sub.txt")), IntegrityError);
}

TEST_CASE("zero-based submissions are supported") {
  TempDir dir("submit_zero");
  auto r = identity_result(5, 5);
  write_submission(r, dir.file("sub.txt"), /*one_based=*/false);
  CHECK(slurp(dir.file("sub.txt")) == "0 1 2 3 4\n");
}

TEST_CASE("a pipeline with no stages writes only the manifest") {
  TempDir dir("pipe_empty");
  auto cfg = PipelineConfig::from_json({{"seed", 5}, {"stages", nlohmann::json::array()}});
  auto manifest = run_pipeline(cfg, dir.file("run"));
  CHECK(manifest.ok);
  CHECK(manifest.stages.empty());
  CHECK(slurp(dir.file("run") + "/manifest.json").find("config_hash") !=
        std::string::npos);
}

TEST_CASE("a failing stage is named in the manifest and aborts the run") {
  TempDir dir("pipe_fail");
  nlohmann::json cfg_json = {
      {"seed", 1},
      {"stages",
       {{{"type", "trr"}, {"name", "needs_data"}},  // fails: nothing loaded
        {{"type", "submit"}}}}};
  auto manifest = run_pipeline(PipelineConfig::from_json(cfg_json), dir.file("run"));
  CHECK_FALSE(manifest.ok);
  CHECK(manifest.failed_stage == "needs_data");
  CHECK(manifest.stages.size() == 1);
  const std::string written = slurp(dir.file("run") + "/manifest.json");
  CHECK(written.find("needs_data") != std::string::npos);
}

TEST_CASE("unknown stage types fail the pipeline gracefully") {
  TempDir dir("pipe_unknown");
  nlohmann::json cfg_json = {{"stages", {{{"type", "teleport"}}}}};
  auto manifest = run_pipeline(PipelineConfig::from_json(cfg_json), dir.file("run"));
  CHECK_FALSE(manifest.ok);
}

TEST_CASE("synth -> trr(wf) -> eval pipeline beats the AF variant on corrupted data") {
  TempDir dir("pipe_wf_af");
  const auto stage_list = [](const std::string& agg) {
    return nlohmann::json{
        {{"type", "synth"}, {"preset", "corrupted_tracklets"}, {"n_ids", 15}},
        {{"type", "trr"},
         {"aggregation", agg},
         {"k1", 8},
         {"k2", 3},
         {"lambda", 0.3},
         {"out", "ranks_" + agg + ".txt"}},
        {{"type", "eval"}, {"k", 100}, {"out", "report_" + agg + ".json"}},
        {{"type", "submit"}, {"out", "sub_" + agg + ".txt"}}};
  };

  nlohmann::json wf_cfg = {{"seed", 21}, {"stages", stage_list("wf")}};
  nlohmann::json af_cfg = {{"seed", 21}, {"stages", stage_list("af")}};

  auto wf = run_pipeline(PipelineConfig::from_json(wf_cfg), dir.file("wf"));
  auto af = run_pipeline(PipelineConfig::from_json(af_cfg), dir.file("af"));
  REQUIRE(wf.ok);
  REQUIRE(af.ok);

  const double wf_map = wf.stages[2].details.at("map_at_k").get<double>();
  const double af_map = af.stages[2].details.at("map_at_k").get<double>();
  CHECK(wf_map >= af_map);
}

TEST_CASE("identical config and seed produce byte-identical artifacts") {
  nlohmann::json cfg_json = {
      {"seed", 33},
      {"stages",
       {{{"type", "synth"}, {"preset", "corrupted_tracklets"}, {"n_ids", 10}},
        {{"type", "trr"}, {"aggregation", "wf"}, {"k1", 6}, {"k2", 2},
         {"lambda", 0.3}, {"out", "ranks.txt"}},
        {{"type", "mine"}, {"dn", 0.6}, {"dp", 0.35}, {"out", "labels.jsonl"}},
        {{"type", "submit"}, {"out", "submission.txt"}}}}};

  TempDir dir("pipe_det");
  auto cfg = PipelineConfig::from_json(cfg_json);
  auto m1 = run_pipeline(cfg, dir.file("a"));
  auto m2 = run_pipeline(cfg, dir.file("b"));
  REQUIRE(m1.ok);
  REQUIRE(m2.ok);
  CHECK(m1.config_hash == m2.config_hash);
  CHECK(slurp(dir.file("a") + "/submission.txt") ==
        slurp(dir.file("b") + "/submission.txt"));
  CHECK(slurp(dir.file("a") + "/labels.jsonl") ==
        slurp(dir.file("b") + "/labels.jsonl"));
  CHECK(slurp(dir.file("a") + "/ranks.txt") == slurp(dir.file("b") + "/ranks.txt"));
}
