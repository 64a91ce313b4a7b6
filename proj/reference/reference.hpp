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

// Serial reference implementations. Straight-line transliterations of the
// definitions, kept deliberately naive and independent of the main library's
// code paths. Linked only by the tests and the benchmark.

#include <cstdint>
#include <map>
#include <vector>

#include "vreid/types.hpp"

namespace vreid::ref {

/// Naive scalar double loop, no tiling, no parallelism.
void distance_matrix_naive(const double* a, std::size_t na, const double* b,
                           std::size_t nb, std::size_t dim, Metric metric,
                           double* out);

/// Full stable argsort per row, truncated to k.
std::vector<std::vector<std::uint32_t>> top_k_full_sort(
    const DistanceMatrix& dist, std::size_t k);

/// Literal evaluation of the mutual-top-k definition (no expansion):
/// { j : j in topk(probe) and probe in topk(j) }, self included, sorted.
std::vector<std::uint32_t> reciprocal_set_bruteforce(
    const DistanceMatrix& dist_all, std::size_t probe, int k);

/// Dense straight-line transliteration of the k-reciprocal re-ranking
/// procedure: full argsorts, dense encoding vectors, no inverted index.
DistanceMatrix rerank_transliteration(const DistanceMatrix& dist_qg,
                                      const DistanceMatrix& dist_qq,
                                      const DistanceMatrix& dist_gg, int k1,
                                      int k2, double lambda);

/// Plain loop mean of the listed rows (no normalization).
std::vector<double> mean_of_rows(const EmbeddingSet& set,
                                 const std::vector<std::size_t>& rows);

/// Definition-transliteration average precision of one ranked list.
/// relevant[g] marks gallery relevance; denominator min(#relevant, k).
double average_precision_literal(const std::vector<std::uint32_t>& ranked,
                                 const std::vector<char>& relevant,
                                 std::size_t k);

/// Literal mAP@k: mean of per-query APs, zero-relevant queries skipped.
double map_literal(const RankedResult& result,
                   const std::vector<std::vector<char>>& relevant,
                   std::size_t k);

/// Literal CMC via first-hit-position scan.
std::map<int, double> cmc_literal(const RankedResult& result,
                                  const std::vector<std::vector<char>>& relevant,
                                  const std::vector<int>& ranks,
                                  std::size_t k);

/// Independent transliteration of the batch-hard soft-margin triplet loss.
double triplet_loss_literal(const EmbeddingSet& batch, double margin);

/// Greedy center selection re-derived from scratch at every step (candidate
/// re-scan, summed-distance argmax, lowest-index ties). The initial center
/// is passed in so the random draw stays out of the oracle.
std::vector<std::uint32_t> im_stage1_bruteforce(const DistanceMatrix& dist_qq,
                                                double negative_threshold,
                                                std::uint32_t first_center);

/// Recomputed k-means objective.
double kmeans_inertia(const EmbeddingSet& set,
                      const std::vector<std::uint32_t>& assignment,
                      const std::vector<double>& centroids, std::size_t dim);

/// Optimal matching accuracy by exhaustive permutation (max 8 pseudo ids).
double accuracy_bruteforce(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& assignments,
    const std::vector<std::string>& vehicle_ids);

}  // namespace vreid::ref
