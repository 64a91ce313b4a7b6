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

#include <cstddef>

#include "vreid/rerank.hpp"
#include "vreid/types.hpp"

namespace vreid {

/**
 * Average-feature aggregation: each tracklet feature is the arithmetic mean
 * of its member features, re-normalized to unit length. Member rows are
 * expected to be L2-normalized already.
 */
TrackFeatureSet average_feature(const EmbeddingSet& gallery,
                                const TrackletIndex& index);

/**
 * Weighted-feature aggregation. Per tracklet, the rows of the query-to-frame
 * distance block whose minimum is below row_threshold are kept (all rows if
 * none qualifies), their column means form the frame quality vector A, frame
 * weights are 1 / (A + 0.01), and the tracklet feature is the weight-scaled
 * sum of member features, re-normalized.
 *
 * dist_q_frames must have one row per query and one column per gallery frame.
 */
TrackFeatureSet weighted_feature(const EmbeddingSet& gallery,
                                 const TrackletIndex& index,
                                 const DistanceMatrix& dist_q_frames,
                                 double row_threshold = 0.2);

/// Image-to-track distance matrix between query features and track features.
DistanceMatrix track_distance(const EmbeddingSet& queries,
                              const TrackFeatureSet& tracks, Metric metric);

struct TrrOptions {
  TrackFeatureSet::Aggregation aggregation =
      TrackFeatureSet::Aggregation::Weighted;
  double row_threshold = 0.2;
  RerankParams rr;
  Metric metric = Metric::Euclidean;
  std::size_t top_k = 100;
};

/**
 * Tracklet-level re-ranking pipeline. Aggregates gallery tracklets, treats
 * every query as a singleton one-frame tracklet, re-ranks at the tracklet
 * level, then expands back to an image-level ranking: all images of a
 * higher-ranked tracklet precede images of lower-ranked tracklets; within a
 * tracklet, images order by the original query-to-frame distance. The output
 * is truncated to top_k entries per query.
 *
 * Throws CoverageError unless index partitions the gallery.
 */
RankedResult trr_pipeline(const EmbeddingSet& query,
                          const EmbeddingSet& gallery,
                          const TrackletIndex& index, const TrrOptions& opts);

/// Image-level k-reciprocal re-ranking followed by plain top-k ranking.
RankedResult rr_only_pipeline(const EmbeddingSet& query,
                              const EmbeddingSet& gallery,
                              const RerankParams& rr, Metric metric,
                              std::size_t top_k = 100);

/// Plain ranking of a query/gallery distance matrix (no re-ranking).
RankedResult rank_by_distance(const DistanceMatrix& dist_qg,
                              std::size_t top_k = 100);

}  // namespace vreid
