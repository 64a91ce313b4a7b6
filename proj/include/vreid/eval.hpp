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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vreid/io.hpp"
#include "vreid/mining.hpp"
#include "vreid/types.hpp"

namespace vreid {

/**
 * Relevance oracle for retrieval evaluation: gallery item g is relevant to
 * query q iff their vehicle ids match (optionally requiring different
 * cameras). Built from per-image metadata.
 */
struct GroundTruth {
  std::vector<std::string> query_vehicle;
  std::vector<std::string> query_camera;
  std::vector<std::string> gallery_vehicle;
  std::vector<std::string> gallery_camera;

  static GroundTruth from_sets(const EmbeddingSet& query,
                               const EmbeddingSet& gallery);
  static GroundTruth from_metadata(const std::vector<MetaRecord>& records);

  bool relevant(std::size_t q, std::size_t g, bool exclude_same_camera) const;
  std::size_t num_relevant(std::size_t q, bool exclude_same_camera) const;
};

struct EvalOptions {
  std::size_t k = 100;
  std::vector<int> cmc_ranks = {1, 5, 10, 15, 20};
  bool exclude_same_camera = false;
};

struct EvalReport {
  double map_at_k = 0.0;
  std::map<int, double> cmc;  // rank -> rate, monotone nondecreasing
  std::vector<double> per_query_ap;       // one entry per evaluated query
  std::vector<std::string> skipped_queries;  // zero relevant gallery items
  std::size_t evaluated_queries = 0;
};

/**
 * mAP@k and CMC in one pass. AP is computed on each query's top-k list with
 * denominator min(#relevant, k); queries without relevant gallery items are
 * skipped (reported, not counted as zero). CMC(r) is the fraction of
 * evaluated queries whose first relevant hit sits at position <= r.
 */
EvalReport evaluate(const RankedResult& result, const GroundTruth& truth,
                    const EvalOptions& opts = {});

double map_at_k(const RankedResult& result, const GroundTruth& truth,
                std::size_t k = 100, bool exclude_same_camera = false);

std::map<int, double> cmc(const RankedResult& result, const GroundTruth& truth,
                          const std::vector<int>& ranks = {1, 5, 10, 15, 20},
                          bool exclude_same_camera = false);

/**
 * Accuracy of pseudo labels under the optimal one-to-one matching between
 * pseudo ids and true ids (Hungarian assignment on the contingency table),
 * restricted to the labeled samples. vehicle_ids holds the ground truth per
 * sample index; a labeled sample without ground truth raises InputError.
 */
double pseudo_label_accuracy(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& assignments,
    const std::vector<std::string>& vehicle_ids);

double pseudo_label_accuracy(const PseudoLabelSet& labels,
                             const std::vector<std::string>& vehicle_ids);

/// Maximum-total-weight one-to-one assignment on a rectangular table.
long long max_assignment_sum(
    const std::vector<std::vector<long long>>& weights);

/**
 * Batch-hard soft-margin triplet loss diagnostic on labeled embeddings:
 * per anchor, the hardest positive is the largest same-id squared distance
 * and the hardest negative the smallest different-id squared distance;
 * the per-anchor term is log(1 + exp(pos - neg + margin)) and the loss is
 * their mean. gradient holds d(loss)/d(features), row-major.
 *
 * Throws InputError unless the batch has >= 2 identities, each with >= 2
 * samples, and every row carries a vehicle id.
 */
struct TripletLossResult {
  struct AnchorTerm {
    std::size_t anchor = 0;
    std::size_t hardest_positive = 0;
    std::size_t hardest_negative = 0;
    double positive_sqdist = 0.0;
    double negative_sqdist = 0.0;
    double term = 0.0;
  };

  double loss = 0.0;
  std::vector<AnchorTerm> per_anchor;
  std::vector<double> gradient;  // n * dim
};

TripletLossResult triplet_loss_batch_hard(const EmbeddingSet& batch,
                                          double margin = 0.0);

}  // namespace vreid
