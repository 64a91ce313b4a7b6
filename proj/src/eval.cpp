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
#include "vreid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace vreid {

GroundTruth GroundTruth::from_sets(const EmbeddingSet& query,
                                   const EmbeddingSet& gallery) {
  GroundTruth gt;
  gt.query_vehicle = query.vehicle_id;
  gt.query_camera = query.camera_id;
  gt.gallery_vehicle = gallery.vehicle_id;
  gt.gallery_camera = gallery.camera_id;
  for (std::size_t q = 0; q < gt.query_vehicle.size(); ++q) {
    if (gt.query_vehicle[q].empty()) {
      throw InputError("ground truth missing for query " + query.ids[q]);
    }
  }
  for (std::size_t g = 0; g < gt.gallery_vehicle.size(); ++g) {
    if (gt.gallery_vehicle[g].empty()) {
      throw InputError("ground truth missing for gallery item " +
                       gallery.ids[g]);
    }
  }
  return gt;
}

GroundTruth GroundTruth::from_metadata(const std::vector<MetaRecord>& records) {
  GroundTruth gt;
  for (const auto& rec : records) {
    if (rec.split == Split::Query) {
      if (rec.vehicle_id.empty()) {
        throw InputError("ground truth missing for query " + rec.id);
      }
      gt.query_vehicle.push_back(rec.vehicle_id);
      gt.query_camera.push_back(rec.camera_id);
    } else if (rec.split == Split::Gallery) {
      if (rec.vehicle_id.empty()) {
        throw InputError("ground truth missing for gallery item " + rec.id);
      }
      gt.gallery_vehicle.push_back(rec.vehicle_id);
      gt.gallery_camera.push_back(rec.camera_id);
    }
  }
  return gt;
}

bool GroundTruth::relevant(std::size_t q, std::size_t g,
                           bool exclude_same_camera) const {
  if (query_vehicle[q] != gallery_vehicle[g]) return false;
  if (exclude_same_camera && !query_camera[q].empty() &&
      query_camera[q] == gallery_camera[g]) {
    return false;
  }
  return true;
}

std::size_t GroundTruth::num_relevant(std::size_t q,
                                      bool exclude_same_camera) const {
  std::size_t n = 0;
  for (std::size_t g = 0; g < gallery_vehicle.size(); ++g) {
    if (relevant(q, g, exclude_same_camera)) ++n;
  }
  return n;
}

EvalReport evaluate(const RankedResult& result, const GroundTruth& truth,
                    const EvalOptions& opts) {
  if (result.query_ids.size() != truth.query_vehicle.size()) {
    throw ShapeError("evaluate: query count mismatch between result and truth");
  }
  if (result.gallery_ids.size() != truth.gallery_vehicle.size()) {
    throw ShapeError("evaluate: gallery count mismatch between result and truth");
  }
  result.validate();

  const std::size_t nq = result.query_ids.size();
  std::vector<double> ap(nq, -1.0);       // -1 marks a skipped query
  std::vector<long long> first_hit(nq, -1);

#pragma omp parallel for schedule(static)
  for (std::int64_t qi = 0; qi < static_cast<std::int64_t>(nq); ++qi) {
    const auto q = static_cast<std::size_t>(qi);
    const std::size_t n_rel = truth.num_relevant(q, opts.exclude_same_camera);
    if (n_rel == 0) continue;

    const auto& list = result.ranks[q];
    const std::size_t depth = std::min(opts.k, list.size());
    std::size_t hits = 0;
    double sum_prec = 0.0;
    for (std::size_t pos = 0; pos < depth; ++pos) {
      if (truth.relevant(q, list[pos], opts.exclude_same_camera)) {
        ++hits;
        sum_prec += static_cast<double>(hits) / static_cast<double>(pos + 1);
        if (first_hit[q] < 0) first_hit[q] = static_cast<long long>(pos + 1);
      }
    }
    ap[q] = sum_prec / static_cast<double>(std::min(n_rel, opts.k));
  }

  EvalReport report;
  double sum_ap = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    if (ap[q] < 0.0) {
      report.skipped_queries.push_back(result.query_ids[q]);
      continue;
    }
    report.per_query_ap.push_back(ap[q]);
    sum_ap += ap[q];
    ++report.evaluated_queries;
  }
  if (report.evaluated_queries == 0) {
    throw InputError("evaluate: no query has relevant gallery items");
  }
  report.map_at_k = sum_ap / static_cast<double>(report.evaluated_queries);

  for (int r : opts.cmc_ranks) {
    std::size_t matched = 0;
    for (std::size_t q = 0; q < nq; ++q) {
      if (ap[q] < 0.0) continue;
      if (first_hit[q] > 0 && first_hit[q] <= r) ++matched;
    }
    report.cmc[r] = static_cast<double>(matched) /
                    static_cast<double>(report.evaluated_queries);
  }
  return report;
}

double map_at_k(const RankedResult& result, const GroundTruth& truth,
                std::size_t k, bool exclude_same_camera) {
  EvalOptions opts;
  opts.k = k;
  opts.exclude_same_camera = exclude_same_camera;
  return evaluate(result, truth, opts).map_at_k;
}

std::map<int, double> cmc(const RankedResult& result, const GroundTruth& truth,
                          const std::vector<int>& ranks,
                          bool exclude_same_camera) {
  EvalOptions opts;
  opts.cmc_ranks = ranks;
  opts.exclude_same_camera = exclude_same_camera;
  return evaluate(result, truth, opts).cmc;
}

long long max_assignment_sum(
    const std::vector<std::vector<long long>>& weights) {
  const std::size_t rows = weights.size();
  if (rows == 0) return 0;
  const std::size_t cols = weights[0].size();
  const std::size_t n = std::max(rows, cols);

  long long top = 0;
  for (const auto& r : weights) {
    if (r.size() != cols) {
      throw ShapeError("max_assignment_sum: ragged weight table");
    }
    for (long long w : r) top = std::max(top, w);
  }

  // Minimum-cost assignment on cost = top - weight, padded to square.
  // Classic potentials formulation, O(n^3).
  const long long inf = std::numeric_limits<long long>::max() / 4;
  auto cost = [&](std::size_t i, std::size_t j) -> long long {
    if (i < rows && j < cols) return top - weights[i][j];
    return top;  // padding rows/cols match nothing
  };

  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> match(n + 1, 0);  // column -> row (1-based)
  std::vector<std::size_t> way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<long long> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      long long delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  long long sum = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = match[j];
    if (i >= 1 && i - 1 < rows && j - 1 < cols) sum += weights[i - 1][j - 1];
  }
  return sum;
}

double pseudo_label_accuracy(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& assignments,
    const std::vector<std::string>& vehicle_ids) {
  if (assignments.empty()) {
    throw InputError("pseudo_label_accuracy: no labeled samples");
  }
  std::unordered_map<std::string, std::size_t> true_index;
  std::size_t max_pid = 0;
  for (const auto& [sample, pid] : assignments) {
    if (sample >= vehicle_ids.size() || vehicle_ids[sample].empty()) {
      throw InputError("pseudo_label_accuracy: sample " +
                       std::to_string(sample) + " lacks ground truth");
    }
    true_index.try_emplace(vehicle_ids[sample], true_index.size());
    max_pid = std::max<std::size_t>(max_pid, pid);
  }

  std::vector<std::vector<long long>> table(
      max_pid + 1, std::vector<long long>(true_index.size(), 0));
  for (const auto& [sample, pid] : assignments) {
    ++table[pid][true_index.at(vehicle_ids[sample])];
  }
  const long long matched = max_assignment_sum(table);
  return static_cast<double>(matched) /
         static_cast<double>(assignments.size());
}

double pseudo_label_accuracy(const PseudoLabelSet& labels,
                             const std::vector<std::string>& vehicle_ids) {
  return pseudo_label_accuracy(labels.assignments, vehicle_ids);
}

TripletLossResult triplet_loss_batch_hard(const EmbeddingSet& batch,
                                          double margin) {
  const std::size_t n = batch.size();
  const std::size_t dim = batch.dim;

  std::unordered_map<std::string, std::size_t> id_count;
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.vehicle_id[i].empty()) {
      throw InputError("triplet loss: sample " + batch.ids[i] +
                       " lacks a vehicle id");
    }
    ++id_count[batch.vehicle_id[i]];
  }
  if (id_count.size() < 2) {
    throw InputError("triplet loss: batch needs at least two identities");
  }
  for (const auto& [vid, count] : id_count) {
    if (count < 2) {
      throw InputError("triplet loss: identity " + vid +
                       " has a single sample");
    }
  }

  // Pairwise squared distances (batches are small, dense is fine).
  std::vector<double> sq(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* a = batch.row(i);
      const double* b = batch.row(j);
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
      }
      sq[i * n + j] = acc;
    }
  }

  TripletLossResult res;
  res.gradient.assign(n * dim, 0.0);
  res.per_anchor.reserve(n);

  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t hp = n, hn = n;
    double hp_d = -1.0;
    double hn_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      if (batch.vehicle_id[j] == batch.vehicle_id[a]) {
        if (sq[a * n + j] > hp_d) {
          hp_d = sq[a * n + j];
          hp = j;
        }
      } else if (sq[a * n + j] < hn_d) {
        hn_d = sq[a * n + j];
        hn = j;
      }
    }

    const double z = hp_d - hn_d + margin;
    // log(1 + exp(z)) without overflow.
    const double term = z > 0.0 ? z + std::log1p(std::exp(-z))
                                : std::log1p(std::exp(z));
    total += term;
    res.per_anchor.push_back({a, hp, hn, hp_d, hn_d, term});

    const double sig = 1.0 / (1.0 + std::exp(-z));
    const double scale = 2.0 * sig * inv_n;
    const double* fa = batch.row(a);
    const double* fp = batch.row(hp);
    const double* fn_ = batch.row(hn);
    double* ga = res.gradient.data() + a * dim;
    double* gp = res.gradient.data() + hp * dim;
    double* gn = res.gradient.data() + hn * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      ga[d] += scale * (fn_[d] - fp[d]);
      gp[d] += scale * (fp[d] - fa[d]);
      gn[d] += scale * (fa[d] - fn_[d]);
    }
  }
  res.loss = total * inv_n;
  return res;
}

}  // namespace vreid
