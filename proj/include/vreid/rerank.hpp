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
#include <vector>

#include "vreid/types.hpp"

namespace vreid {

/**
 * Hyperparameters of k-reciprocal re-ranking.
 *
 * k1 sizes the reciprocal neighborhood, k2 the local query expansion,
 * lambda mixes the original distance into the Jaccard distance.
 * float32_workspace stores the materialized probe+gallery square matrix in
 * single precision (half the memory, slightly lower accuracy).
 */
struct RerankParams {
  int k1 = 20;
  int k2 = 6;
  double lambda = 0.3;
  bool float32_workspace = false;

  /// Throws ParamError unless k1 >= 1, 1 <= k2 <= k1 and 0 <= lambda <= 1.
  void validate() const;
};

/**
 * The k-reciprocal neighbor set of one probe in a square all-pairs distance
 * matrix: { j : j in topk(probe) and probe in topk(j) }, where topk includes
 * the point itself. With expand set, the set is augmented by the half-set
 * expansion rule (candidates whose half-size reciprocal set overlaps the
 * probe's set in more than two thirds of its elements contribute their
 * half-set). Returned indices are sorted ascending.
 *
 * Throws ShapeError if the matrix is not square, ParamError unless
 * 1 <= k <= n - 1.
 */
std::vector<std::uint32_t> k_reciprocal_neighbors(const DistanceMatrix& dist_all,
                                                  std::size_t probe, int k,
                                                  bool expand = true);

/**
 * k-reciprocal re-ranking of a probe/gallery distance matrix.
 *
 * Encodes every point's expanded reciprocal set as a Gaussian-kernel weight
 * vector (exp(-d) on the input distances, row-normalized), applies local
 * query expansion over the k2 nearest neighbors, computes the Jaccard
 * distance between probe and gallery encodings, and blends:
 *
 *   final = lambda * original + (1 - lambda) * jaccard
 *
 * The three inputs must be consistent slices of one probe-union-gallery
 * space. Output has the shape (and ids) of dist_qg. Deterministic and
 * independent of the thread count.
 */
DistanceMatrix rerank(const DistanceMatrix& dist_qg,
                      const DistanceMatrix& dist_qq,
                      const DistanceMatrix& dist_gg, const RerankParams& params);

}  // namespace vreid
