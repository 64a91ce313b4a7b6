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
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vreid/errors.hpp"

namespace vreid {

enum class Metric {
  Euclidean,
  SquaredEuclidean,
  CosineDistance,
};

const char* to_string(Metric m);
Metric metric_from_string(std::string_view s);

enum class Split {
  Query,
  Gallery,
  Train,
};

const char* to_string(Split s);
Split split_from_string(std::string_view s);

/**
 * A set of embedding vectors with per-image metadata.
 *
 * Features are stored row-major, one row per image, widened to double.
 * Optional metadata fields use the empty string as "not set".
 */
struct EmbeddingSet {
  std::vector<std::string> ids;
  std::vector<double> features;  // size() * dim, row-major
  std::size_t dim = 0;
  std::vector<Split> split;
  std::vector<std::string> tracklet_id;
  std::vector<std::string> camera_id;
  std::vector<std::string> vehicle_id;

  std::size_t size() const { return ids.size(); }

  const double* row(std::size_t i) const { return features.data() + i * dim; }
  double* row(std::size_t i) { return features.data() + i * dim; }

  std::span<const double> row_span(std::size_t i) const {
    return {row(i), dim};
  }

  /// Indices of all rows carrying the given split tag, in row order.
  std::vector<std::size_t> rows_with_split(Split s) const;

  /// Copy of the listed rows (features and all metadata).
  EmbeddingSet select(std::span<const std::size_t> rows) const;

  /// Checks size agreement, N >= 1, D >= 1 and id uniqueness.
  void validate() const;
};

/// Concatenate two sets row-wise. Dimensions must match.
EmbeddingSet concat(const EmbeddingSet& a, const EmbeddingSet& b);

/**
 * Dense rows x cols matrix of distances under a declared metric.
 */
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows * cols, row-major
  Metric metric = Metric::Euclidean;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  const double* row(std::size_t i) const { return values.data() + i * cols; }
};

/**
 * Mapping tracklet -> member frame indices into a gallery EmbeddingSet.
 * Tracklets appear in order of first appearance; members keep row order.
 */
struct TrackletIndex {
  struct Tracklet {
    std::string id;
    std::vector<std::size_t> frames;
  };
  std::vector<Tracklet> tracklets;

  /// Groups gallery rows by their tracklet_id. Rows with no tracklet_id
  /// become singleton tracklets keyed by the image id.
  static TrackletIndex from_metadata(const EmbeddingSet& gallery);

  std::size_t size() const { return tracklets.size(); }
  std::size_t total_frames() const;

  /// Throws CoverageError unless tracklets form a partition of [0, n_frames),
  /// InputError on an empty tracklet.
  void validate_partition(std::size_t n_frames) const;
};

/**
 * One aggregated feature vector per tracklet.
 */
struct TrackFeatureSet {
  enum class Aggregation { Average, Weighted };

  std::vector<std::string> track_ids;
  std::vector<double> features;  // size() * dim, row-major
  std::size_t dim = 0;
  Aggregation aggregation = Aggregation::Average;

  std::size_t size() const { return track_ids.size(); }
  const double* row(std::size_t i) const { return features.data() + i * dim; }
  double* row(std::size_t i) { return features.data() + i * dim; }
};

/**
 * Per-query ordered gallery indices (best first), the unit of evaluation
 * and submission. Indices are zero-based positions in gallery_ids.
 */
struct RankedResult {
  std::vector<std::string> query_ids;
  std::vector<std::string> gallery_ids;
  std::vector<std::vector<std::uint32_t>> ranks;
  std::size_t top_k = 100;

  /// Throws IntegrityError on duplicate or out-of-range gallery indices.
  void validate() const;
};

}  // namespace vreid
