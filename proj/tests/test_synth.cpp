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

#include <cmath>
#include <map>
#include <set>

#include "helpers.hpp"
#include "vreid/core.hpp"
#include "vreid/eval.hpp"
#include "vreid/synth.hpp"
#include "vreid/tracklet.hpp"

using namespace vreid;

TEST_CASE("zero noise collapses every image onto its id center") {
  SynthScenario sc;
  sc.n_ids = 5;
  sc.dim = 16;
  sc.noise_sigma = 0.0;
  sc.center_min_dist = 0.5;
  sc.seed = 2;
  auto all = generate(sc);

  // All rows of one vehicle coincide, and plain ranking is perfect.
  std::map<std::string, std::vector<std::size_t>> by_vid;
  for (std::size_t i = 0; i < all.size(); ++i) by_vid[all.vehicle_id[i]].push_back(i);
  for (const auto& [vid, rows] : by_vid) {
    for (std::size_t r : rows) {
      for (std::size_t d = 0; d < all.dim; ++d) {
        CHECK(all.row(r)[d] == all.row(rows[0])[d]);
      }
    }
  }

  auto query = all.select(all.rows_with_split(Split::Query));
  auto gallery = all.select(all.rows_with_split(Split::Gallery));
  auto ranking = rank_by_distance(
      distance_matrix(l2_normalize(query), l2_normalize(gallery),
                      Metric::Euclidean),
      100);
  CHECK(map_at_k(ranking, GroundTruth::from_sets(query, gallery)) ==
        doctest::Approx(1.0));
}

TEST_CASE("near-antipodal pair of centers sits about 1.9 apart") {
  SynthScenario sc;
  sc.n_ids = 2;
  sc.dim = 8;
  sc.noise_sigma = 0.0;
  sc.center_min_dist = 1.9;
  sc.seed = 3;
  auto all = generate(sc);
  auto query = all.select(all.rows_with_split(Split::Query));
  // One query per id suffices: with zero noise it equals the center.
  auto q0 = all.vehicle_id[0];
  std::size_t other = 1;
  while (all.vehicle_id[other] == q0) ++other;
  double sq = 0.0;
  for (std::size_t d = 0; d < all.dim; ++d) {
    const double diff = all.row(0)[d] - all.row(other)[d];
    sq += diff * diff;
  }
  const double dist = std::sqrt(sq);
  CHECK(dist >= 1.9);
  CHECK(dist <= 2.0);
}

TEST_CASE("generation is bit-identical across runs and thread counts") {
  auto sc = preset("corrupted_tracklets");
  sc.n_ids = 10;
  auto a = generate(sc);
  const int before = max_threads();
  set_threads(7);
  auto b = generate(sc);
  set_threads(before);
  CHECK(a.features == b.features);
  CHECK(a.ids == b.ids);
  CHECK(a.tracklet_id == b.tracklet_id);
  CHECK(a.camera_id == b.camera_id);
  CHECK(a.vehicle_id == b.vehicle_id);
}

TEST_CASE("all presets resolve and generate valid sets") {
  auto names = {"well_separated", "overlapping", "corrupted_tracklets",
                "cityflow_scale"};
  for (const auto* name : names) {
    auto sc = preset(name);
    CHECK(sc.name == name);
  }
  CHECK_THROWS_AS(preset("no_such_preset"), ParamError);
  CHECK(scenario_presets().size() == 4);
}

TEST_CASE("cityflow_scale preset pins the published set sizes") {
  auto sc = preset("cityflow_scale");
  CHECK(sc.exact_query_total == 1052);
  CHECK(sc.exact_gallery_total == 17238);
  CHECK(sc.dim == 2048);

  // Counts do not depend on the feature dimension; shrink it for speed
  // (64 keeps the center-separation constraint satisfiable).
  sc.dim = 64;
  auto all = generate(sc);
  CHECK(all.rows_with_split(Split::Query).size() == 1052);
  CHECK(all.rows_with_split(Split::Gallery).size() == 17238);

  // Tracklet bookkeeping: gallery fully covered, lengths within bounds.
  auto gallery = all.select(all.rows_with_split(Split::Gallery));
  auto index = TrackletIndex::from_metadata(gallery);
  index.validate_partition(gallery.size());
  CHECK(index.total_frames() == 17238);
}

TEST_CASE("every tracklet's frames share one vehicle id") {
  auto sc = preset("corrupted_tracklets");
  auto all = generate(sc);
  auto gallery = all.select(all.rows_with_split(Split::Gallery));
  auto index = TrackletIndex::from_metadata(gallery);
  for (const auto& t : index.tracklets) {
    for (std::size_t f : t.frames) {
      CHECK(gallery.vehicle_id[f] == gallery.vehicle_id[t.frames[0]]);
    }
  }
}

TEST_CASE("generated features are unit norm") {
  auto sc = preset("overlapping");
  sc.n_ids = 8;
  auto all = generate(sc);
  for (std::size_t i = 0; i < all.size(); ++i) {
    double sq = 0.0;
    for (std::size_t d = 0; d < all.dim; ++d) sq += all.row(i)[d] * all.row(i)[d];
    CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-6);
  }
}

TEST_CASE("infeasible center separation raises a generation error") {
  SynthScenario sc;
  sc.n_ids = 3;
  sc.dim = 8;
  sc.center_min_dist = 1.99;  // three mutually near-antipodal unit vectors
  sc.center_retry_limit = 2000;
  CHECK_THROWS_AS(generate(sc), GenerationError);
}

TEST_CASE("zero corruption makes AF and WF rankings agree") {
  auto sc = preset("corrupted_tracklets");
  sc.n_ids = 12;
  sc.corrupt_fraction = 0.0;
  for (std::uint64_t seed : {41u, 42u, 43u}) {
    sc.seed = seed;
    auto all = l2_normalize(generate(sc));
    auto query = all.select(all.rows_with_split(Split::Query));
    auto gallery = all.select(all.rows_with_split(Split::Gallery));
    auto index = TrackletIndex::from_metadata(gallery);

    TrrOptions opts;
    opts.rr.k1 = 6;
    opts.rr.k2 = 2;
    opts.rr.lambda = 0.3;
    opts.top_k = 40;
    opts.aggregation = TrackFeatureSet::Aggregation::Average;
    auto af = trr_pipeline(query, gallery, index, opts);
    opts.aggregation = TrackFeatureSet::Aggregation::Weighted;
    auto wf = trr_pipeline(query, gallery, index, opts);

    // Without corrupted frames the weights are nearly uniform, so the two
    // aggregations induce the same retrieval quality.
    auto gt = GroundTruth::from_sets(query, gallery);
    CHECK(map_at_k(af, gt, 40) == doctest::Approx(map_at_k(wf, gt, 40)).epsilon(1e-6));
  }
}

TEST_CASE("suggested mining thresholds are ordered and positive") {
  for (const auto& sc : scenario_presets()) {
    auto p = suggested_mining(sc, 1);
    CHECK(p.positive_threshold > 0.0);
    CHECK(p.positive_threshold < p.negative_threshold);
    p.validate();
  }
}
