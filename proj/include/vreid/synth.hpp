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
#include <string_view>
#include <vector>

#include "vreid/mining.hpp"
#include "vreid/types.hpp"

namespace vreid {

/**
 * A seeded synthetic embedding scenario: identity clusters on the unit
 * sphere with controllable spread, separation, tracklet structure and an
 * optional fraction of corrupted (heavily perturbed) gallery frames.
 * Generation is a pure single-threaded function of the scenario.
 */
struct SynthScenario {
  std::string name = "custom";
  std::size_t n_ids = 50;
  std::size_t dim = 32;
  std::size_t queries_per_id = 3;
  std::size_t gallery_per_id_min = 8;
  std::size_t gallery_per_id_max = 14;
  std::size_t tracklet_len_min = 3;
  std::size_t tracklet_len_max = 6;
  double noise_sigma = 0.04;     // intra-cluster spread
  double center_min_dist = 0.8;  // pairwise center separation (rejection)
  double corrupt_fraction = 0.0;
  double corrupt_sigma = 0.6;
  std::size_t n_cameras = 8;
  std::uint64_t seed = 1;
  // When nonzero, per-id counts are derived so the totals match exactly
  // (base count per id, remainder spread over the first ids).
  std::size_t exact_query_total = 0;
  std::size_t exact_gallery_total = 0;
  std::size_t center_retry_limit = 200000;
};

/**
 * Generates the scenario: unit-norm clustered embeddings with split,
 * vehicle_id, tracklet_id (gallery) and camera_id metadata. Query rows come
 * first, then gallery rows grouped by vehicle and tracklet. Features are
 * rounded to float32 so a file round trip is bit-exact.
 *
 * Throws GenerationError if the center separation cannot be realized within
 * the retry limit.
 */
EmbeddingSet generate(const SynthScenario& scenario);

/// Named scenario catalog: well_separated, overlapping, corrupted_tracklets,
/// cityflow_scale.
std::vector<SynthScenario> scenario_presets();

/// Lookup by name; throws ParamError for unknown names.
SynthScenario preset(std::string_view name);

/**
 * Mining thresholds derived from the scenario geometry: the positive
 * threshold sits just above the expected same-id pair distance, the negative
 * threshold between that and the expected cross-id sample distance.
 */
MiningParams suggested_mining(const SynthScenario& scenario,
                              std::uint64_t mining_seed = 0);

}  // namespace vreid
