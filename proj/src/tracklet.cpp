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
#include "vreid/tracklet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vreid/core.hpp"

namespace vreid {

namespace {

// Returns false on a zero-norm row; never throws (runs inside omp regions).
[[nodiscard]] bool normalize_row(double* r, std::size_t dim) {
  double sq = 0.0;
  for (std::size_t t = 0; t < dim; ++t) sq += r[t] * r[t];
  if (sq == 0.0) return false;
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t t = 0; t < dim; ++t) r[t] *= inv;
  return true;
}

// Shared precondition scan: no empty tracklet, no out-of-range frame.
// Runs before any parallel region so errors surface as exceptions.
void check_tracklets(const TrackletIndex& index, std::size_t n_frames) {
  for (const auto& t : index.tracklets) {
    if (t.frames.empty()) throw InputError("empty tracklet: " + t.id);
    for (std::size_t f : t.frames) {
      if (f >= n_frames) {
        throw CoverageError("tracklet " + t.id + " references frame " +
                            std::to_string(f) + " outside the gallery");
      }
    }
  }
}

}  // namespace

TrackFeatureSet average_feature(const EmbeddingSet& gallery,
                                const TrackletIndex& index) {
  check_tracklets(index, gallery.size());
  const std::size_t dim = gallery.dim;
  TrackFeatureSet out;
  out.dim = dim;
  out.aggregation = TrackFeatureSet::Aggregation::Average;
  out.track_ids.reserve(index.size());
  for (const auto& t : index.tracklets) out.track_ids.push_back(t.id);
  out.features.assign(index.size() * dim, 0.0);
  std::int64_t degenerate = -1;
#pragma omp parallel for schedule(static)
  for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(index.size()); ++ti) {
    const auto& frames = index.tracklets[static_cast<std::size_t>(ti)].frames;
    double* feat = out.row(static_cast<std::size_t>(ti));
    for (std::size_t f : frames) {
      const double* r = gallery.row(f);
      for (std::size_t d = 0; d < dim; ++d) feat[d] += r[d];
    }
    const double inv = 1.0 / static_cast<double>(frames.size());
    for (std::size_t d = 0; d < dim; ++d) feat[d] *= inv;
    if (!normalize_row(feat, dim)) {
#pragma omp critical
      degenerate = ti;
    }
  }
  if (degenerate >= 0) {
    throw InputError("degenerate aggregated feature for tracklet " +
                     index.tracklets[static_cast<std::size_t>(degenerate)].id);
  }
  return out;
}

TrackFeatureSet weighted_feature(const EmbeddingSet& gallery,
                                 const TrackletIndex& index,
                                 const DistanceMatrix& dist_q_frames,
                                 double row_threshold) {
  check_tracklets(index, gallery.size());
  const std::size_t dim = gallery.dim;
  const std::size_t nq = dist_q_frames.rows;
  if (nq == 0) throw InputError("weighted_feature: no query rows");
  if (dist_q_frames.cols != gallery.size()) {
    throw ShapeError("weighted_feature: distance columns must cover the gallery");
  }
  TrackFeatureSet out;
  out.dim = dim;
  out.aggregation = TrackFeatureSet::Aggregation::Weighted;
  out.track_ids.reserve(index.size());
  for (const auto& t : index.tracklets) out.track_ids.push_back(t.id);
  out.features.assign(index.size() * dim, 0.0);

  std::int64_t degenerate = -1;
#pragma omp parallel
  {
    std::vector<double> col_mean;
#pragma omp for schedule(static)
    for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(index.size());
         ++ti) {
      const auto& frames = index.tracklets[static_cast<std::size_t>(ti)].frames;
      const std::size_t s = frames.size();

      // Rows of the query-to-tracklet block whose min is below the
      // threshold; fall back to all rows when none qualifies.
      std::size_t kept = 0;
      for (int pass = 0; pass < 2 && kept == 0; ++pass) {
        col_mean.assign(s, 0.0);
        for (std::size_t q = 0; q < nq; ++q) {
          const double* qrow = dist_q_frames.row(q);
          if (pass == 0) {
            double lo = qrow[frames[0]];
            for (std::size_t j = 1; j < s; ++j) {
              lo = std::min(lo, qrow[frames[j]]);
            }
            if (!(lo < row_threshold)) continue;
          }
          for (std::size_t j = 0; j < s; ++j) col_mean[j] += qrow[frames[j]];
          ++kept;
        }
      }

      double* feat = out.row(static_cast<std::size_t>(ti));
      for (std::size_t j = 0; j < s; ++j) {
        const double avg = col_mean[j] / static_cast<double>(kept);
        const double weight = 1.0 / (avg + 0.01);
        const double* r = gallery.row(frames[j]);
        for (std::size_t d = 0; d < dim; ++d) feat[d] += r[d] * weight;
      }
      if (!normalize_row(feat, dim)) {
#pragma omp critical
        degenerate = ti;
      }
    }
  }
  if (degenerate >= 0) {
    throw InputError("degenerate aggregated feature for tracklet " +
                     index.tracklets[static_cast<std::size_t>(degenerate)].id);
  }
  return out;
}

DistanceMatrix track_distance(const EmbeddingSet& queries,
                              const TrackFeatureSet& tracks, Metric metric) {
  if (queries.dim != tracks.dim) {
    throw ShapeError("track_distance: dimension mismatch");
  }
  DistanceMatrix dm;
  dm.rows = queries.size();
  dm.cols = tracks.size();
  dm.metric = metric;
  dm.row_ids = queries.ids;
  dm.col_ids = tracks.track_ids;
  dm.values.resize(dm.rows * dm.cols);
  pairwise_distances(queries.features.data(), dm.rows, tracks.features.data(),
                     dm.cols, queries.dim, metric, dm.values.data());
  return dm;
}

namespace {

DistanceMatrix track_square(const TrackFeatureSet& tracks, Metric metric) {
  DistanceMatrix dm;
  dm.rows = tracks.size();
  dm.cols = tracks.size();
  dm.metric = metric;
  dm.row_ids = tracks.track_ids;
  dm.col_ids = tracks.track_ids;
  dm.values.resize(dm.rows * dm.cols);
  pairwise_distances(tracks.features.data(), dm.rows, tracks.features.data(),
                     dm.cols, tracks.dim, metric, dm.values.data());
  return dm;
}

}  // namespace

RankedResult trr_pipeline(const EmbeddingSet& query,
                          const EmbeddingSet& gallery,
                          const TrackletIndex& index, const TrrOptions& opts) {
  index.validate_partition(gallery.size());
  opts.rr.validate();

  const DistanceMatrix dist_qf = distance_matrix(query, gallery, opts.metric);

  const TrackFeatureSet tracks =
      opts.aggregation == TrackFeatureSet::Aggregation::Average
          ? average_feature(gallery, index)
          : weighted_feature(gallery, index, dist_qf, opts.row_threshold);

  const DistanceMatrix dist_qt = track_distance(query, tracks, opts.metric);
  const DistanceMatrix dist_qq = distance_matrix(query, query, opts.metric);
  const DistanceMatrix dist_tt = track_square(tracks, opts.metric);

  const DistanceMatrix reranked = rerank(dist_qt, dist_qq, dist_tt, opts.rr);

  const std::size_t n_tracks = tracks.size();
  const std::size_t top_k = std::min(opts.top_k, gallery.size());

  RankedResult result;
  result.query_ids = query.ids;
  result.gallery_ids = gallery.ids;
  result.top_k = top_k;
  result.ranks.resize(query.size());

#pragma omp parallel for schedule(static)
  for (std::int64_t qi = 0; qi < static_cast<std::int64_t>(query.size());
       ++qi) {
    const std::size_t q = static_cast<std::size_t>(qi);
    const auto track_order = top_k_of_row(reranked.row(q), n_tracks, n_tracks);
    const double* qrow = dist_qf.row(q);

    std::vector<std::uint32_t>& list = result.ranks[q];
    list.reserve(top_k);
    std::vector<std::size_t> members;
    for (std::uint32_t t : track_order) {
      if (list.size() >= top_k) break;
      members.assign(index.tracklets[t].frames.begin(),
                     index.tracklets[t].frames.end());
      std::sort(members.begin(), members.end(),
                [qrow](std::size_t a, std::size_t b) {
                  if (qrow[a] != qrow[b]) return qrow[a] < qrow[b];
                  return a < b;
                });
      for (std::size_t f : members) {
        if (list.size() >= top_k) break;
        list.push_back(static_cast<std::uint32_t>(f));
      }
    }
  }
  return result;
}

RankedResult rr_only_pipeline(const EmbeddingSet& query,
                              const EmbeddingSet& gallery,
                              const RerankParams& rr, Metric metric,
                              std::size_t top_k) {
  const DistanceMatrix dist_qg = distance_matrix(query, gallery, metric);
  const DistanceMatrix dist_qq = distance_matrix(query, query, metric);
  const DistanceMatrix dist_gg = distance_matrix(gallery, gallery, metric);
  return rank_by_distance(rerank(dist_qg, dist_qq, dist_gg, rr), top_k);
}

RankedResult rank_by_distance(const DistanceMatrix& dist_qg,
                              std::size_t top_k) {
  const std::size_t k = std::min(top_k, dist_qg.cols);
  RankedResult result;
  result.query_ids = dist_qg.row_ids;
  result.gallery_ids = dist_qg.col_ids;
  result.top_k = k;
  result.ranks = top_k_neighbors(dist_qg, k);
  return result;
}

}  // namespace vreid
