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
#include "vreid/mining.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "vreid/core.hpp"

namespace vreid {

void MiningParams::validate() const {
  if (!(negative_threshold > 0.0) || !(positive_threshold > 0.0)) {
    throw ParamError("mining: thresholds must be positive");
  }
  if (!(positive_threshold < negative_threshold)) {
    throw ParamError("mining: the positive threshold must be below the negative one");
  }
  if (restarts < 1) throw ParamError("mining: restarts must be >= 1");
}

std::vector<std::uint32_t> im_stage1(const DistanceMatrix& dist_qq,
                                     const MiningParams& params) {
  params.validate();
  if (dist_qq.rows != dist_qq.cols) {
    throw ShapeError("im_stage1: query distance matrix must be square");
  }
  const std::size_t n = dist_qq.rows;
  if (n == 0) throw InputError("im_stage1: empty query set");

  std::mt19937_64 rng(params.seed);
  const auto first =
      static_cast<std::uint32_t>(std::uniform_int_distribution<std::size_t>(
          0, n - 1)(rng));

  std::vector<std::uint32_t> centers{first};
  // Running min/sum distance of every query to the selected set.
  std::vector<double> min_to_set(n), sum_to_set(n);
  const double* frow = dist_qq.row(first);
  for (std::size_t q = 0; q < n; ++q) {
    min_to_set[q] = frow[q];
    sum_to_set[q] = frow[q];
  }

  const double dn = params.negative_threshold;
  for (;;) {
    // Among candidates farther than dn from every selected center, take the
    // one with the largest summed distance; ties break to the lower index.
    std::int64_t best = -1;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < n; ++q) {
      if (min_to_set[q] > dn && sum_to_set[q] > best_sum) {
        best_sum = sum_to_set[q];
        best = static_cast<std::int64_t>(q);
      }
    }
    if (best < 0) break;
    const auto c = static_cast<std::uint32_t>(best);
    centers.push_back(c);
    const double* crow = dist_qq.row(c);
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < static_cast<std::int64_t>(n); ++q) {
      const auto sq = static_cast<std::size_t>(q);
      min_to_set[sq] = std::min(min_to_set[sq], crow[sq]);
      sum_to_set[sq] += crow[sq];
    }
  }
  return centers;
}

PseudoLabelSet im_stage2(const DistanceMatrix& dist_all_to_centers,
                         const std::vector<std::uint32_t>& centers,
                         const MiningParams& params) {
  params.validate();
  if (centers.empty()) throw InputError("im_stage2: empty center list");
  if (dist_all_to_centers.cols != centers.size()) {
    throw ShapeError("im_stage2: one column per center expected");
  }
  const std::size_t n = dist_all_to_centers.rows;
  const std::size_t t = centers.size();
  const double dp = params.positive_threshold;

  std::vector<std::int64_t> label(n, -1);
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < static_cast<std::int64_t>(n); ++x) {
    const double* row = dist_all_to_centers.row(static_cast<std::size_t>(x));
    std::size_t arg = 0;
    double lo = row[0];
    for (std::size_t c = 1; c < t; ++c) {
      if (row[c] < lo) {
        lo = row[c];
        arg = c;
      }
    }
    if (lo < dp) label[static_cast<std::size_t>(x)] = static_cast<std::int64_t>(arg);
  }
  // Centers always carry their own pseudo id.
  for (std::size_t c = 0; c < t; ++c) {
    if (centers[c] < n) label[centers[c]] = static_cast<std::int64_t>(c);
  }

  PseudoLabelSet out;
  out.centers = centers;
  out.params = params;
  for (std::size_t x = 0; x < n; ++x) {
    if (label[x] >= 0) {
      out.assignments.emplace_back(static_cast<std::uint32_t>(x),
                                   static_cast<std::uint32_t>(label[x]));
    }
  }
  return out;
}

namespace {

// Optional stage-2 iteration: labeled samples become anchors of their pseudo
// id and the pass repeats until no sample joins. Distances to the new
// anchors are computed from features on demand.
void iterate_assignments(const EmbeddingSet& all, PseudoLabelSet& labels,
                         const MiningParams& params) {
  const std::size_t n = all.size();
  std::vector<std::int64_t> label(n, -1);
  for (const auto& [x, pid] : labels.assignments) label[x] = pid;

  std::vector<std::uint32_t> frontier;
  for (const auto& [x, pid] : labels.assignments) frontier.push_back(x);

  const double dp = params.positive_threshold;
  while (!frontier.empty()) {
    std::vector<std::uint32_t> unlabeled;
    for (std::size_t x = 0; x < n; ++x) {
      if (label[x] < 0) unlabeled.push_back(static_cast<std::uint32_t>(x));
    }
    if (unlabeled.empty()) break;

    std::vector<double> dist(unlabeled.size() * frontier.size());
    EmbeddingSet anchors;  // features of the current frontier
    anchors.dim = all.dim;
    for (std::uint32_t a : frontier) {
      anchors.features.insert(anchors.features.end(), all.row(a),
                              all.row(a) + all.dim);
    }
    EmbeddingSet probes;
    probes.dim = all.dim;
    for (std::uint32_t u : unlabeled) {
      probes.features.insert(probes.features.end(), all.row(u),
                             all.row(u) + all.dim);
    }
    pairwise_distances(probes.features.data(), unlabeled.size(),
                       anchors.features.data(), frontier.size(), all.dim,
                       params.metric, dist.data());

    std::vector<std::uint32_t> joined;
    for (std::size_t ui = 0; ui < unlabeled.size(); ++ui) {
      const double* row = dist.data() + ui * frontier.size();
      std::size_t arg = 0;
      double lo = row[0];
      for (std::size_t ai = 1; ai < frontier.size(); ++ai) {
        if (row[ai] < lo) {
          lo = row[ai];
          arg = ai;
        }
      }
      if (lo < dp) {
        label[unlabeled[ui]] = label[frontier[arg]];
        joined.push_back(unlabeled[ui]);
      }
    }
    frontier = std::move(joined);
  }

  labels.assignments.clear();
  for (std::size_t x = 0; x < n; ++x) {
    if (label[x] >= 0) {
      labels.assignments.emplace_back(static_cast<std::uint32_t>(x),
                                      static_cast<std::uint32_t>(label[x]));
    }
  }
}

}  // namespace

PseudoLabelSet identity_mine(const EmbeddingSet& query,
                             const EmbeddingSet& gallery,
                             const MiningParams& params) {
  params.validate();
  if (query.size() == 0) throw InputError("identity_mine: empty query set");

  const DistanceMatrix dist_qq = distance_matrix(query, query, params.metric);
  const EmbeddingSet all = concat(query, gallery);

  PseudoLabelSet best;
  bool have_best = false;
  for (int r = 0; r < params.restarts; ++r) {
    MiningParams run = params;
    run.seed = params.seed + static_cast<std::uint64_t>(r);
    run.restarts = 1;

    const auto centers = im_stage1(dist_qq, run);
    std::vector<std::size_t> center_rows(centers.begin(), centers.end());
    const EmbeddingSet center_set = query.select(center_rows);
    const DistanceMatrix dist_ac =
        distance_matrix(all, center_set, params.metric);
    PseudoLabelSet labels = im_stage2(dist_ac, centers, run);
    if (params.iterate_stage2) iterate_assignments(all, labels, run);

    if (!have_best ||
        labels.centers.size() > best.centers.size() ||
        (labels.centers.size() == best.centers.size() &&
         labels.assignments.size() > best.assignments.size())) {
      best = std::move(labels);
      have_best = true;
    }
  }
  return best;
}

MiningAudit validate_mining(const PseudoLabelSet& labels,
                            const DistanceMatrix& dist_qq,
                            const DistanceMatrix& dist_all_to_centers) {
  MiningAudit audit;
  const double dn = labels.params.negative_threshold;
  const double dp = labels.params.positive_threshold;
  const auto& centers = labels.centers;

  audit.separation_ok = true;
  for (std::size_t a = 0; a < centers.size() && audit.separation_ok; ++a) {
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      if (!(dist_qq.at(centers[a], centers[b]) > dn)) {
        audit.separation_ok = false;
        audit.detail += "centers " + std::to_string(centers[a]) + "," +
                        std::to_string(centers[b]) + " too close; ";
        break;
      }
    }
  }

  audit.maximality_ok = true;
  for (std::size_t q = 0; q < dist_qq.rows; ++q) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::uint32_t c : centers) lo = std::min(lo, dist_qq.at(q, c));
    if (lo > dn) {
      audit.maximality_ok = false;
      audit.detail += "query " + std::to_string(q) + " still eligible; ";
      break;
    }
  }

  audit.assignments_ok = true;
  std::unordered_set<std::uint32_t> center_set(centers.begin(), centers.end());
  for (const auto& [x, pid] : labels.assignments) {
    const double* row = dist_all_to_centers.row(x);
    std::size_t arg = 0;
    double lo = row[0];
    for (std::size_t c = 1; c < centers.size(); ++c) {
      if (row[c] < lo) {
        lo = row[c];
        arg = c;
      }
    }
    const bool is_center = center_set.count(x) > 0;
    if (pid != arg || (!is_center && !(row[pid] < dp))) {
      audit.assignments_ok = false;
      audit.detail += "sample " + std::to_string(x) + " misassigned; ";
      break;
    }
  }
  return audit;
}

KmeansResult kmeans_baseline(const EmbeddingSet& set, std::size_t k,
                             std::uint64_t seed, int max_iter) {
  const std::size_t n = set.size();
  const std::size_t dim = set.dim;
  if (k < 1 || k > n) {
    throw ParamError("kmeans: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(n) + "]");
  }
  if (max_iter < 1) throw ParamError("kmeans: max_iter must be >= 1");

  KmeansResult res;
  res.k = k;
  res.dim = dim;

  // Seeded init: k distinct rows drawn by shuffling the index range.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  res.centroids.resize(k * dim);
  for (std::size_t c = 0; c < k; ++c) {
    const double* r = set.row(order[c]);
    std::copy(r, r + dim, res.centroids.begin() + c * dim);
  }

  res.assignment.assign(n, 0);
  std::vector<std::vector<std::uint32_t>> members(k);
  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    std::int64_t changed = 0;
#pragma omp parallel for schedule(static) reduction(+ : changed)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      const auto si = static_cast<std::size_t>(i);
      const double* r = set.row(si);
      std::size_t arg = 0;
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double* cent = res.centroids.data() + c * dim;
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = r[d] - cent[d];
          acc += diff * diff;
        }
        if (acc < lo) {
          lo = acc;
          arg = c;
        }
      }
      if (res.assignment[si] != arg) {
        res.assignment[si] = static_cast<std::uint32_t>(arg);
        ++changed;
      }
    }
    if (iter > 0 && changed == 0) {
      res.converged = true;
      break;
    }

    for (auto& m : members) m.clear();
    for (std::size_t i = 0; i < n; ++i) members[res.assignment[i]].push_back(
        static_cast<std::uint32_t>(i));
    // Empty clusters keep their previous centroid.
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(k); ++c) {
      const auto& m = members[static_cast<std::size_t>(c)];
      if (m.empty()) continue;
      double* cent = res.centroids.data() + static_cast<std::size_t>(c) * dim;
      std::fill(cent, cent + dim, 0.0);
      for (std::uint32_t i : m) {
        const double* r = set.row(i);
        for (std::size_t d = 0; d < dim; ++d) cent[d] += r[d];
      }
      const double inv = 1.0 / static_cast<double>(m.size());
      for (std::size_t d = 0; d < dim; ++d) cent[d] *= inv;
    }
  }

  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = set.row(i);
    const double* cent = res.centroids.data() + res.assignment[i] * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = r[d] - cent[d];
      inertia += diff * diff;
    }
  }
  res.inertia = inertia;
  return res;
}

void save_labels(const PseudoLabelSet& labels,
                 const std::vector<std::string>& sample_ids,
                 const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  std::unordered_set<std::uint32_t> center_set(labels.centers.begin(),
                                               labels.centers.end());
  for (const auto& [sample, pid] : labels.assignments) {
    if (sample >= sample_ids.size()) {
      throw IntegrityError("label sample index out of range");
    }
    nlohmann::json j;
    j["id"] = sample_ids[sample];
    j["pseudo_id"] = pid;
    j["is_center"] = center_set.count(sample) > 0;
    out << j.dump() << '\n';
  }
}

std::vector<LabelRecord> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open label file: " + path);
  std::vector<LabelRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": bad JSON: " + e.what());
    }
    LabelRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.pseudo_id = j.at("pseudo_id").get<std::uint32_t>();
    rec.is_center = j.value("is_center", false);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace vreid
