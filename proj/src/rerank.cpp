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
#include "vreid/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vreid/core.hpp"

namespace vreid {

void RerankParams::validate() const {
  if (k1 < 1) throw ParamError("rerank: k1 must be >= 1");
  if (k2 < 1 || k2 > k1) throw ParamError("rerank: k2 must satisfy 1 <= k2 <= k1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ParamError("rerank: lambda must lie in [0, 1]");
  }
}

namespace {

// Sparse encoding of one sample's reciprocal-set weights, index-sorted.
struct SparseRow {
  std::vector<std::uint32_t> idx;
  std::vector<double> w;
};

// First k+1 ranked neighbors of `who` (self included) contain `target`?
bool among_forward(const std::vector<std::uint32_t>& rank, std::size_t kmax,
                   std::uint32_t who, int k, std::uint32_t target) {
  const std::uint32_t* p = rank.data() + static_cast<std::size_t>(who) * kmax;
  for (int t = 0; t <= k; ++t) {
    if (p[t] == target) return true;
  }
  return false;
}

std::vector<std::uint32_t> reciprocal_set(const std::vector<std::uint32_t>& rank,
                                          std::size_t kmax, std::uint32_t probe,
                                          int k) {
  std::vector<std::uint32_t> out;
  out.reserve(k + 1);
  const std::uint32_t* fwd = rank.data() + static_cast<std::size_t>(probe) * kmax;
  for (int t = 0; t <= k; ++t) {
    const std::uint32_t cand = fwd[t];
    if (among_forward(rank, kmax, cand, k, probe)) out.push_back(cand);
  }
  return out;
}

// Half-set expansion: candidates whose half-size reciprocal set overlaps the
// base set in more than two thirds of its elements contribute their half-set.
std::vector<std::uint32_t> expand_set(
    const std::vector<std::uint32_t>& base,
    const std::vector<std::vector<std::uint32_t>>& half_sets) {
  std::vector<std::uint32_t> sorted_base = base;
  std::sort(sorted_base.begin(), sorted_base.end());
  std::vector<std::uint32_t> expanded = sorted_base;
  for (std::uint32_t cand : base) {
    const auto& half = half_sets[cand];
    std::size_t overlap = 0;
    for (std::uint32_t h : half) {
      if (std::binary_search(sorted_base.begin(), sorted_base.end(), h)) {
        ++overlap;
      }
    }
    if (3 * overlap > 2 * half.size()) {
      expanded.insert(expanded.end(), half.begin(), half.end());
    }
  }
  std::sort(expanded.begin(), expanded.end());
  expanded.erase(std::unique(expanded.begin(), expanded.end()),
                 expanded.end());
  return expanded;
}

template <typename T>
std::vector<std::uint32_t> rank_row(const T* row, std::size_t n,
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

template <typename T>
DistanceMatrix rerank_impl(const DistanceMatrix& dist_qg,
                           const DistanceMatrix& dist_qq,
                           const DistanceMatrix& dist_gg,
                           const RerankParams& p) {
  const std::size_t nq = dist_qg.rows;
  const std::size_t ng = dist_qg.cols;
  const std::size_t n = nq + ng;
  const int k1 = p.k1;
  const int k2 = p.k2;
  // Half-set size follows round-half-to-even, matching the established
  // recipe's integer rounding.
  const int kh = static_cast<int>(std::nearbyint(k1 / 2.0));
  const std::size_t kmax = static_cast<std::size_t>(std::max(k1 + 1, k2));

  // Materialized probe+gallery square matrix.
  std::vector<T> orig(n * n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    T* row = orig.data() + si * n;
    if (si < nq) {
      for (std::size_t j = 0; j < nq; ++j) row[j] = static_cast<T>(dist_qq.at(si, j));
      for (std::size_t j = 0; j < ng; ++j) row[nq + j] = static_cast<T>(dist_qg.at(si, j));
    } else {
      const std::size_t gi = si - nq;
      for (std::size_t j = 0; j < nq; ++j) row[j] = static_cast<T>(dist_qg.at(j, gi));
      for (std::size_t j = 0; j < ng; ++j) row[nq + j] = static_cast<T>(dist_gg.at(gi, j));
    }
  }

  // Top-kmax neighbor lists per row (self ranks first: zero self-distance).
  std::vector<std::uint32_t> rank(n * kmax);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    auto top = rank_row<T>(orig.data() + si * n, n, kmax);
    std::copy(top.begin(), top.end(), rank.begin() + si * kmax);
  }

  std::vector<std::vector<std::uint32_t>> recip_full(n), recip_half(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const auto u = static_cast<std::uint32_t>(i);
    recip_full[u] = reciprocal_set(rank, kmax, u, k1);
    recip_half[u] = reciprocal_set(rank, kmax, u, kh);
  }

  // Gaussian-kernel encoding of the expanded reciprocal sets.
  std::vector<SparseRow> enc(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    auto members = expand_set(recip_full[si], recip_half);
    SparseRow row;
    row.idx = std::move(members);
    row.w.resize(row.idx.size());
    const T* d = orig.data() + si * n;
    double sum = 0.0;
    for (std::size_t t = 0; t < row.idx.size(); ++t) {
      row.w[t] = std::exp(-static_cast<double>(d[row.idx[t]]));
      sum += row.w[t];
    }
    for (double& w : row.w) w /= sum;
    enc[si] = std::move(row);
  }

  // Local query expansion: average the encodings of the k2 nearest rows.
  if (k2 > 1) {
    std::vector<SparseRow> enc2(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      std::vector<std::pair<std::uint32_t, double>> acc;
      for (int m = 0; m < k2; ++m) {
        const std::uint32_t src = rank[si * kmax + m];
        const SparseRow& s = enc[src];
        for (std::size_t t = 0; t < s.idx.size(); ++t) {
          acc.emplace_back(s.idx[t], s.w[t]);
        }
      }
      std::stable_sort(acc.begin(), acc.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      SparseRow merged;
      const double inv = 1.0 / k2;
      for (std::size_t t = 0; t < acc.size();) {
        const std::uint32_t col = acc[t].first;
        double sum = 0.0;
        while (t < acc.size() && acc[t].first == col) {
          sum += acc[t].second;
          ++t;
        }
        merged.idx.push_back(col);
        merged.w.push_back(sum * inv);
      }
      enc2[si] = std::move(merged);
    }
    enc.swap(enc2);
  }

  // Inverted index over encoding columns, rows ascending.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> inverted(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < enc[i].idx.size(); ++t) {
      inverted[enc[i].idx[t]].emplace_back(static_cast<std::uint32_t>(i),
                                           enc[i].w[t]);
    }
  }

  DistanceMatrix out;
  out.rows = nq;
  out.cols = ng;
  out.metric = dist_qg.metric;
  out.row_ids = dist_qg.row_ids;
  out.col_ids = dist_qg.col_ids;
  out.values.resize(nq * ng);

  const double lambda = p.lambda;
#pragma omp parallel
  {
    std::vector<double> overlap(n);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(nq); ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      std::fill(overlap.begin(), overlap.end(), 0.0);
      const SparseRow& q = enc[si];
      for (std::size_t t = 0; t < q.idx.size(); ++t) {
        const double wq = q.w[t];
        for (const auto& [other, wo] : inverted[q.idx[t]]) {
          overlap[other] += std::min(wq, wo);
        }
      }
      double* orow = out.values.data() + si * ng;
      for (std::size_t g = 0; g < ng; ++g) {
        const double s = overlap[nq + g];
        const double jaccard = 1.0 - s / (2.0 - s);
        orow[g] = lambda * dist_qg.at(si, g) + (1.0 - lambda) * jaccard;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> k_reciprocal_neighbors(const DistanceMatrix& dist_all,
                                                  std::size_t probe, int k,
                                                  bool expand) {
  if (dist_all.rows != dist_all.cols) {
    throw ShapeError("k_reciprocal_neighbors: matrix must be square");
  }
  const std::size_t n = dist_all.rows;
  if (probe >= n) throw ParamError("k_reciprocal_neighbors: probe out of range");
  if (k < 1 || static_cast<std::size_t>(k) + 1 > n) {
    throw ParamError("k_reciprocal_neighbors: k=" + std::to_string(k) +
                     " exceeds the set size");
  }
  const int kh = static_cast<int>(std::nearbyint(k / 2.0));
  const std::size_t kmax = static_cast<std::size_t>(k) + 1;
  std::vector<std::uint32_t> rank(n * kmax);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    auto top = rank_row<double>(dist_all.row(si), n, kmax);
    std::copy(top.begin(), top.end(), rank.begin() + si * kmax);
  }
  auto base =
      reciprocal_set(rank, kmax, static_cast<std::uint32_t>(probe), k);
  if (!expand) {
    std::sort(base.begin(), base.end());
    return base;
  }
  std::vector<std::vector<std::uint32_t>> half(n);
  for (std::uint32_t cand : base) {
    half[cand] = reciprocal_set(rank, kmax, cand, kh);
  }
  return expand_set(base, half);
}

DistanceMatrix rerank(const DistanceMatrix& dist_qg,
                      const DistanceMatrix& dist_qq,
                      const DistanceMatrix& dist_gg,
                      const RerankParams& params) {
  params.validate();
  const std::size_t nq = dist_qg.rows;
  const std::size_t ng = dist_qg.cols;
  if (dist_qq.rows != nq || dist_qq.cols != nq) {
    throw ShapeError("rerank: dist_qq must be the query-square slice");
  }
  if (dist_gg.rows != ng || dist_gg.cols != ng) {
    throw ShapeError("rerank: dist_gg must be the gallery-square slice");
  }
  const std::size_t n = nq + ng;
  if (static_cast<std::size_t>(params.k1) + 1 > n ||
      static_cast<std::size_t>(params.k2) > n) {
    throw ParamError("rerank: k1/k2 exceed the probe+gallery set size");
  }
  if (params.float32_workspace) {
    return rerank_impl<float>(dist_qg, dist_qq, dist_gg, params);
  }
  return rerank_impl<double>(dist_qg, dist_qq, dist_gg, params);
}

}  // namespace vreid
