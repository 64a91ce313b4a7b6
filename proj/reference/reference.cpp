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
#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace vreid::ref {

void distance_matrix_naive(const double* a, std::size_t na, const double* b,
                           std::size_t nb, std::size_t dim, Metric metric,
                           double* out) {
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double* ra = a + i * dim;
      const double* rb = b + j * dim;
      double value = 0.0;
      if (metric == Metric::CosineDistance) {
        double dot = 0.0, qa = 0.0, qb = 0.0;
        for (std::size_t t = 0; t < dim; ++t) {
          dot += ra[t] * rb[t];
          qa += ra[t] * ra[t];
          qb += rb[t] * rb[t];
        }
        value = 1.0 - dot / (std::sqrt(qa) * std::sqrt(qb));
        if (value < 0.0) value = 0.0;
        if (value > 2.0) value = 2.0;
      } else {
        double acc = 0.0;
        for (std::size_t t = 0; t < dim; ++t) {
          const double diff = ra[t] - rb[t];
          acc += diff * diff;
        }
        value = metric == Metric::Euclidean ? std::sqrt(acc) : acc;
      }
      out[i * nb + j] = value;
    }
  }
}

std::vector<std::vector<std::uint32_t>> top_k_full_sort(
    const DistanceMatrix& dist, std::size_t k) {
  std::vector<std::vector<std::uint32_t>> out(dist.rows);
  for (std::size_t i = 0; i < dist.rows; ++i) {
    const double* row = dist.row(i);
    std::vector<std::uint32_t> idx(dist.cols);
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [row](std::uint32_t x, std::uint32_t y) {
                       return row[x] < row[y];
                     });
    idx.resize(k);
    out[i] = std::move(idx);
  }
  return out;
}

namespace {

std::vector<std::vector<std::uint32_t>> full_argsort(
    const std::vector<double>& m, std::size_t n) {
  std::vector<std::vector<std::uint32_t>> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = m.data() + i * n;
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [row](std::uint32_t x, std::uint32_t y) {
                       return row[x] < row[y];
                     });
    rank[i] = std::move(idx);
  }
  return rank;
}

std::vector<std::uint32_t> mutual_topk(
    const std::vector<std::vector<std::uint32_t>>& rank, std::uint32_t probe,
    int k) {
  std::vector<std::uint32_t> out;
  for (int t = 0; t <= k; ++t) {
    const std::uint32_t cand = rank[probe][t];
    for (int s = 0; s <= k; ++s) {
      if (rank[cand][s] == probe) {
        out.push_back(cand);
        break;
      }
    }
  }
  return out;
}

std::set<std::uint32_t> expanded_set(
    const std::vector<std::vector<std::uint32_t>>& rank, std::uint32_t probe,
    int k1) {
  const int kh = static_cast<int>(std::nearbyint(k1 / 2.0));
  const auto base = mutual_topk(rank, probe, k1);
  std::set<std::uint32_t> result(base.begin(), base.end());
  for (std::uint32_t cand : base) {
    const auto half = mutual_topk(rank, cand, kh);
    std::size_t overlap = 0;
    for (std::uint32_t h : half) {
      if (std::find(base.begin(), base.end(), h) != base.end()) ++overlap;
    }
    if (static_cast<double>(overlap) >
        2.0 / 3.0 * static_cast<double>(half.size())) {
      result.insert(half.begin(), half.end());
    }
  }
  return result;
}

}  // namespace

std::vector<std::uint32_t> reciprocal_set_bruteforce(
    const DistanceMatrix& dist_all, std::size_t probe, int k) {
  const std::size_t n = dist_all.rows;
  const auto rank = full_argsort(dist_all.values, n);
  auto out = mutual_topk(rank, static_cast<std::uint32_t>(probe), k);
  std::sort(out.begin(), out.end());
  return out;
}

DistanceMatrix rerank_transliteration(const DistanceMatrix& dist_qg,
                                      const DistanceMatrix& dist_qq,
                                      const DistanceMatrix& dist_gg, int k1,
                                      int k2, double lambda) {
  const std::size_t nq = dist_qg.rows;
  const std::size_t ng = dist_qg.cols;
  const std::size_t n = nq + ng;

  std::vector<double> orig(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v;
      if (i < nq && j < nq) {
        v = dist_qq.at(i, j);
      } else if (i < nq) {
        v = dist_qg.at(i, j - nq);
      } else if (j < nq) {
        v = dist_qg.at(j, i - nq);
      } else {
        v = dist_gg.at(i - nq, j - nq);
      }
      orig[i * n + j] = v;
    }
  }

  const auto rank = full_argsort(orig, n);

  // Dense Gaussian-kernel encodings of the expanded reciprocal sets.
  std::vector<std::vector<double>> enc(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto members = expanded_set(rank, static_cast<std::uint32_t>(i), k1);
    double sum = 0.0;
    for (std::uint32_t j : members) {
      enc[i][j] = std::exp(-orig[i * n + j]);
      sum += enc[i][j];
    }
    for (std::uint32_t j : members) enc[i][j] /= sum;
  }

  if (k2 > 1) {
    std::vector<std::vector<double>> expanded(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (int m = 0; m < k2; ++m) {
        const std::uint32_t src = rank[i][m];
        for (std::size_t j = 0; j < n; ++j) expanded[i][j] += enc[src][j];
      }
      for (std::size_t j = 0; j < n; ++j) expanded[i][j] /= k2;
    }
    enc.swap(expanded);
  }

  DistanceMatrix out;
  out.rows = nq;
  out.cols = ng;
  out.metric = dist_qg.metric;
  out.row_ids = dist_qg.row_ids;
  out.col_ids = dist_qg.col_ids;
  out.values.resize(nq * ng);
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t g = 0; g < ng; ++g) {
      double inter = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        inter += std::min(enc[i][c], enc[nq + g][c]);
      }
      const double jaccard = 1.0 - inter / (2.0 - inter);
      out.at(i, g) = lambda * dist_qg.at(i, g) + (1.0 - lambda) * jaccard;
    }
  }
  return out;
}

std::vector<double> mean_of_rows(const EmbeddingSet& set,
                                 const std::vector<std::size_t>& rows) {
  std::vector<double> mean(set.dim, 0.0);
  for (std::size_t r : rows) {
    for (std::size_t d = 0; d < set.dim; ++d) mean[d] += set.row(r)[d];
  }
  for (double& v : mean) v /= static_cast<double>(rows.size());
  return mean;
}

double average_precision_literal(const std::vector<std::uint32_t>& ranked,
                                 const std::vector<char>& relevant,
                                 std::size_t k) {
  std::size_t total_relevant = 0;
  for (char c : relevant) total_relevant += c ? 1 : 0;
  if (total_relevant == 0) return -1.0;

  std::size_t hits = 0;
  double sum = 0.0;
  const std::size_t depth = std::min(k, ranked.size());
  for (std::size_t pos = 0; pos < depth; ++pos) {
    if (relevant[ranked[pos]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
    }
  }
  return sum / static_cast<double>(std::min(total_relevant, k));
}

double map_literal(const RankedResult& result,
                   const std::vector<std::vector<char>>& relevant,
                   std::size_t k) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t q = 0; q < result.ranks.size(); ++q) {
    const double ap = average_precision_literal(result.ranks[q], relevant[q], k);
    if (ap < 0.0) continue;
    sum += ap;
    ++counted;
  }
  return counted ? sum / static_cast<double>(counted) : 0.0;
}

std::map<int, double> cmc_literal(const RankedResult& result,
                                  const std::vector<std::vector<char>>& relevant,
                                  const std::vector<int>& ranks,
                                  std::size_t k) {
  std::vector<long long> first_hit;
  std::size_t counted = 0;
  for (std::size_t q = 0; q < result.ranks.size(); ++q) {
    std::size_t total_relevant = 0;
    for (char c : relevant[q]) total_relevant += c ? 1 : 0;
    if (total_relevant == 0) continue;
    ++counted;
    long long hit = -1;
    const std::size_t depth = std::min(k, result.ranks[q].size());
    for (std::size_t pos = 0; pos < depth; ++pos) {
      if (relevant[q][result.ranks[q][pos]]) {
        hit = static_cast<long long>(pos + 1);
        break;
      }
    }
    first_hit.push_back(hit);
  }
  std::map<int, double> out;
  for (int r : ranks) {
    std::size_t matched = 0;
    for (long long h : first_hit) {
      if (h > 0 && h <= r) ++matched;
    }
    out[r] = counted ? static_cast<double>(matched) / static_cast<double>(counted)
                     : 0.0;
  }
  return out;
}

double triplet_loss_literal(const EmbeddingSet& batch, double margin) {
  const std::size_t n = batch.size();
  auto sqdist = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t d = 0; d < batch.dim; ++d) {
      const double diff = batch.row(a)[d] - batch.row(b)[d];
      acc += diff * diff;
    }
    return acc;
  };
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double hardest_pos = -1.0;
    double hardest_neg = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      if (batch.vehicle_id[j] == batch.vehicle_id[a]) {
        hardest_pos = std::max(hardest_pos, sqdist(a, j));
      } else {
        hardest_neg = std::min(hardest_neg, sqdist(a, j));
      }
    }
    total += std::log(1.0 + std::exp(hardest_pos - hardest_neg + margin));
  }
  return total / static_cast<double>(n);
}

std::vector<std::uint32_t> im_stage1_bruteforce(const DistanceMatrix& dist_qq,
                                                double negative_threshold,
                                                std::uint32_t first_center) {
  const std::size_t n = dist_qq.rows;
  std::vector<std::uint32_t> centers{first_center};
  for (;;) {
    // Re-derive the candidate set and the argmax from scratch.
    std::int64_t best = -1;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < n; ++q) {
      double lo = std::numeric_limits<double>::infinity();
      double sum = 0.0;
      for (std::uint32_t c : centers) {
        lo = std::min(lo, dist_qq.at(q, c));
        sum += dist_qq.at(q, c);
      }
      if (lo > negative_threshold && sum > best_sum) {
        best_sum = sum;
        best = static_cast<std::int64_t>(q);
      }
    }
    if (best < 0) break;
    centers.push_back(static_cast<std::uint32_t>(best));
  }
  return centers;
}

double kmeans_inertia(const EmbeddingSet& set,
                      const std::vector<std::uint32_t>& assignment,
                      const std::vector<double>& centroids, std::size_t dim) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double* r = set.row(i);
    const double* c = centroids.data() + assignment[i] * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = r[d] - c[d];
      inertia += diff * diff;
    }
  }
  return inertia;
}

double accuracy_bruteforce(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& assignments,
    const std::vector<std::string>& vehicle_ids) {
  std::unordered_map<std::string, std::size_t> true_index;
  std::size_t max_pid = 0;
  for (const auto& [sample, pid] : assignments) {
    true_index.try_emplace(vehicle_ids[sample], true_index.size());
    max_pid = std::max<std::size_t>(max_pid, pid);
  }
  const std::size_t n_pid = max_pid + 1;
  const std::size_t n_true = true_index.size();
  std::vector<std::vector<long long>> table(n_pid,
                                            std::vector<long long>(n_true, 0));
  for (const auto& [sample, pid] : assignments) {
    ++table[pid][true_index.at(vehicle_ids[sample])];
  }

  // Enumerate injections from the smaller side into the larger one.
  const std::size_t small = std::min(n_pid, n_true);
  const std::size_t large = std::max(n_pid, n_true);
  if (small > 8) {
    throw ParamError("accuracy_bruteforce: too many ids for enumeration");
  }
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0u);
  long long best = 0;
  std::sort(perm.begin(), perm.end());
  do {
    long long sum = 0;
    for (std::size_t s = 0; s < small; ++s) {
      const std::size_t pid = n_pid <= n_true ? s : perm[s];
      const std::size_t tid = n_pid <= n_true ? perm[s] : s;
      if (pid < n_pid && tid < n_true) sum += table[pid][tid];
    }
    best = std::max(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::size_t total = assignments.size();
  return static_cast<double>(best) / static_cast<double>(total);
}

}  // namespace vreid::ref
