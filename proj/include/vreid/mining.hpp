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
#include <utility>
#include <vector>

#include "vreid/types.hpp"

namespace vreid {

/**
 * Identity-mining thresholds. negative_threshold spaces the mined centers
 * (pairs farther apart than it are treated as different identities);
 * positive_threshold bounds the assignment radius around each center.
 * positive_threshold < negative_threshold must hold.
 */
struct MiningParams {
  double negative_threshold = 0.49;  // --dn
  double positive_threshold = 0.23;  // --dp
  std::uint64_t seed = 0;
  int restarts = 1;
  bool iterate_stage2 = false;  // labeled samples become anchors, off by default
  Metric metric = Metric::Euclidean;

  void validate() const;
};

/**
 * Mined pseudo labels. centers[t] is the sample index (into the combined
 * query-then-gallery ordering) of the center carrying pseudo id t.
 * assignments maps sample index -> pseudo id, sorted by sample index;
 * every center is assigned to its own pseudo id.
 */
struct PseudoLabelSet {
  std::vector<std::uint32_t> centers;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> assignments;
  MiningParams params;

  std::size_t labeled_count() const { return assignments.size(); }
};

/**
 * Stage 1: greedy selection of mutually distant centers from the query set.
 * The first center is a seeded uniform draw; afterwards, among queries whose
 * minimum distance to the selected set exceeds negative_threshold, the one
 * with the largest summed distance to the set is taken (ties break toward
 * the lower index) until no candidate remains.
 */
std::vector<std::uint32_t> im_stage1(const DistanceMatrix& dist_qq,
                                     const MiningParams& params);

/**
 * Stage 2: single-pass assignment. A sample is labeled iff its minimum
 * distance to a center is below positive_threshold, and receives the pseudo
 * id of the nearest center (ties break toward the lower ordinal).
 * Rows of dist_all_to_centers are candidate samples, columns are centers;
 * centers[t] gives the row index of center t.
 */
PseudoLabelSet im_stage2(const DistanceMatrix& dist_all_to_centers,
                         const std::vector<std::uint32_t>& centers,
                         const MiningParams& params);

/**
 * Both stages composed: stage 1 on the query set, stage 2 on query+gallery.
 * Sample indices in the result refer to the combined ordering (queries
 * first). With restarts > 1, runs seeds seed..seed+restarts-1 and keeps the
 * run with the most centers (ties: more assigned samples, then lower seed).
 * Deterministic given the parameter set.
 */
PseudoLabelSet identity_mine(const EmbeddingSet& query,
                             const EmbeddingSet& gallery,
                             const MiningParams& params);

/// Post-hoc audit of the mining invariants, recomputed from the matrices.
struct MiningAudit {
  bool separation_ok = false;   // all center pairs farther than dn
  bool maximality_ok = false;   // no query left with min distance > dn
  bool assignments_ok = false;  // every assignment within dp of its argmin center
  std::string detail;

  bool ok() const { return separation_ok && maximality_ok && assignments_ok; }
};

MiningAudit validate_mining(const PseudoLabelSet& labels,
                            const DistanceMatrix& dist_qq,
                            const DistanceMatrix& dist_all_to_centers);

/**
 * Lloyd's k-means with seeded initialization (k distinct input rows chosen
 * uniformly). Every sample is assigned; iteration stops on convergence or
 * after max_iter rounds. Deterministic and thread-count independent.
 */
struct KmeansResult {
  std::vector<std::uint32_t> assignment;  // one pseudo id per input row
  std::vector<double> centroids;          // k * dim, row-major
  std::size_t k = 0;
  std::size_t dim = 0;
  double inertia = 0.0;  // sum of squared distances to assigned centroids
  int iterations = 0;
  bool converged = false;
};

KmeansResult kmeans_baseline(const EmbeddingSet& set, std::size_t k,
                             std::uint64_t seed, int max_iter = 100);

/// Label file: JSON lines {"id":..., "pseudo_id":..., "is_center":...}.
void save_labels(const PseudoLabelSet& labels,
                 const std::vector<std::string>& sample_ids,
                 const std::string& path);

struct LabelRecord {
  std::string id;
  std::uint32_t pseudo_id = 0;
  bool is_center = false;
};

std::vector<LabelRecord> load_labels(const std::string& path);

}  // namespace vreid
