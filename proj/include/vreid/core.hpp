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
#include <vector>

#include "vreid/types.hpp"

namespace vreid {

/// Number of threads the parallel kernels will use.
int max_threads();

/// Overrides the thread count (wins over OMP_NUM_THREADS). n <= 0 is ignored.
void set_threads(int n);

/**
 * Returns a copy of the set with every row scaled to unit Euclidean norm.
 * Throws InputError if a row has zero norm.
 */
EmbeddingSet l2_normalize(const EmbeddingSet& set);

/// In-place variant of l2_normalize.
void l2_normalize_in_place(EmbeddingSet& set);

/**
 * Low-level distance kernel: fills out[i * nb + j] with the distance between
 * a-row i and b-row j under the given metric. Parallel over rows of a; the
 * result is independent of the thread count. All accumulation in double.
 */
void pairwise_distances(const double* a, std::size_t na, const double* b,
                        std::size_t nb, std::size_t dim, Metric metric,
                        double* out);

/**
 * Distance matrix between two embedding sets. Throws ShapeError if the
 * dimensions differ, InputError for zero-norm rows under cosine distance.
 */
DistanceMatrix distance_matrix(const EmbeddingSet& a, const EmbeddingSet& b,
                               Metric metric);

/// Indices of the k smallest entries of row (ascending distance, ties broken
/// by lower index). k must satisfy 1 <= k <= n.
std::vector<std::uint32_t> top_k_of_row(const double* row, std::size_t n,
                                        std::size_t k);

/**
 * Per-row lists of the k nearest column indices, ascending by distance with
 * ties broken by lower column index. Throws ParamError unless 1 <= k <= cols.
 */
std::vector<std::vector<std::uint32_t>> top_k_neighbors(
    const DistanceMatrix& dist, std::size_t k);

}  // namespace vreid
