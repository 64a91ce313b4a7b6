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
#include "vreid/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace vreid {

int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
  if (n <= 0) return;
#if defined(_OPENMP)
  omp_set_num_threads(n);
#endif
}

EmbeddingSet l2_normalize(const EmbeddingSet& set) {
  EmbeddingSet out = set;
  l2_normalize_in_place(out);
  return out;
}

void l2_normalize_in_place(EmbeddingSet& set) {
  const std::size_t n = set.size();
  const std::size_t d = set.dim;
  // Scan for degenerate rows first so an exception never escapes a
  // parallel region.
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = set.row(i);
    double sq = 0.0;
    for (std::size_t t = 0; t < d; ++t) sq += r[t] * r[t];
    if (sq == 0.0) {
      throw InputError("l2_normalize: row " + std::to_string(i) + " (" +
                       (i < set.ids.size() ? set.ids[i] : "?") +
                       ") has zero norm");
    }
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    double* r = set.row(static_cast<std::size_t>(i));
    double sq = 0.0;
    for (std::size_t t = 0; t < d; ++t) sq += r[t] * r[t];
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t t = 0; t < d; ++t) r[t] *= inv;
  }
}

namespace {

void row_norms(const double* a, std::size_t n, std::size_t dim,
               std::vector<double>& out) {
  out.resize(n);
  std::int64_t bad = -1;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const double* r = a + static_cast<std::size_t>(i) * dim;
    double sq = 0.0;
    for (std::size_t t = 0; t < dim; ++t) sq += r[t] * r[t];
    out[static_cast<std::size_t>(i)] = std::sqrt(sq);
    if (sq == 0.0) {
#pragma omp critical
      bad = i;
    }
  }
  if (bad >= 0) {
    throw InputError("cosine distance: row " + std::to_string(bad) +
                     " has zero norm");
  }
}

}  // namespace

void pairwise_distances(const double* a, std::size_t na, const double* b,
                        std::size_t nb, std::size_t dim, Metric metric,
                        double* out) {
  if (metric == Metric::CosineDistance) {
    std::vector<double> norm_a, norm_b;
    row_norms(a, na, dim, norm_a);
    row_norms(b, nb, dim, norm_b);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(na); ++i) {
      const double* ra = a + static_cast<std::size_t>(i) * dim;
      double* orow = out + static_cast<std::size_t>(i) * nb;
      for (std::size_t j = 0; j < nb; ++j) {
        const double* rb = b + j * dim;
        double dot = 0.0;
        for (std::size_t t = 0; t < dim; ++t) dot += ra[t] * rb[t];
        const double c =
            1.0 - dot / (norm_a[static_cast<std::size_t>(i)] * norm_b[j]);
        orow[j] = std::clamp(c, 0.0, 2.0);
      }
    }
    return;
  }

  const bool take_sqrt = (metric == Metric::Euclidean);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(na); ++i) {
    const double* ra = a + static_cast<std::size_t>(i) * dim;
    double* orow = out + static_cast<std::size_t>(i) * nb;
    for (std::size_t j = 0; j < nb; ++j) {
      const double* rb = b + j * dim;
      double acc = 0.0;
      for (std::size_t t = 0; t < dim; ++t) {
        const double diff = ra[t] - rb[t];
        acc += diff * diff;
      }
      orow[j] = take_sqrt ? std::sqrt(acc) : acc;
    }
  }
}

DistanceMatrix distance_matrix(const EmbeddingSet& a, const EmbeddingSet& b,
                               Metric metric) {
  if (a.dim != b.dim) {
    throw ShapeError("distance_matrix: dimension mismatch (" +
                     std::to_string(a.dim) + " vs " + std::to_string(b.dim) +
                     ")");
  }
  DistanceMatrix dm;
  dm.rows = a.size();
  dm.cols = b.size();
  dm.metric = metric;
  dm.row_ids = a.ids;
  dm.col_ids = b.ids;
  dm.values.resize(dm.rows * dm.cols);
  pairwise_distances(a.features.data(), dm.rows, b.features.data(), dm.cols,
                     a.dim, metric, dm.values.data());
  return dm;
}

std::vector<std::uint32_t> top_k_of_row(const double* row, std::size_t n,
                                        std::size_t k) {
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                    idx.end(), [row](std::uint32_t x, std::uint32_t y) {
                      if (row[x] != row[y]) return row[x] < row[y];
                      return x < y;
                    });
  idx.resize(k);
  return idx;
}

std::vector<std::vector<std::uint32_t>> top_k_neighbors(
    const DistanceMatrix& dist, std::size_t k) {
  if (k < 1 || k > dist.cols) {
    throw ParamError("top_k_neighbors: k=" + std::to_string(k) +
                     " outside [1, " + std::to_string(dist.cols) + "]");
  }
  std::vector<std::vector<std::uint32_t>> out(dist.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(dist.rows); ++i) {
    out[static_cast<std::size_t>(i)] =
        top_k_of_row(dist.row(static_cast<std::size_t>(i)), dist.cols, k);
  }
  return out;
}

}  // namespace vreid
