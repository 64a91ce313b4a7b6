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
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vreid/types.hpp"

namespace vreid {

/**
 * Pipeline configuration: a JSON document with a global "seed" and a
 * "stages" array. Each stage object carries a "type" (synth, load, trr,
 * mine, kmeans, eval, submit, distmat) plus stage-specific keys; see the
 * README for the full schema. CLI flags override the matching config keys.
 */
struct PipelineConfig {
  nlohmann::json doc = nlohmann::json::object();

  static PipelineConfig from_file(const std::string& path);
  static PipelineConfig from_json(nlohmann::json j);

  std::uint64_t seed() const;
  void set_seed(std::uint64_t s);
};

struct StageRecord {
  std::string type;
  std::string name;
  double seconds = 0.0;
  bool ok = false;
  std::string error;
  nlohmann::json details = nlohmann::json::object();
};

/**
 * Run manifest, always written to <out_dir>/manifest.json, even when a
 * stage fails (the failing stage is named and partial artifacts are kept).
 */
struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<StageRecord> stages;
  bool ok = false;
  std::string failed_stage;

  nlohmann::json to_json() const;
};

/**
 * Executes the configured stage sequence, writing every intermediate
 * artifact under out_dir plus the manifest. Stage failure stops the run;
 * the manifest is still written and the error is reported in the result.
 * (config, seed) fully determines all artifact bytes.
 */
RunManifest run_pipeline(const PipelineConfig& config,
                         const std::string& out_dir);

/**
 * Challenge submission file: one line per query in query order, pad_to
 * space-separated gallery indices (one-based by default). Lists shorter
 * than pad_to are padded with the lowest-index unused gallery items; the
 * pad target caps at the gallery size. Duplicate indices raise
 * IntegrityError.
 */
void write_submission(const RankedResult& result, const std::string& path,
                      bool one_based = true, std::size_t pad_to = 100);

/// FNV-1a 64-bit hash of a string, hex-encoded (used for config hashes).
std::string fnv1a_hex(const std::string& data);

}  // namespace vreid
