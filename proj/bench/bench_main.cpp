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

// Compares the OpenMP kernels against the serial reference implementations
// and reports per-kernel timing plus the largest observed divergence.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "reference.hpp"
#include "vreid/core.hpp"
#include "vreid/rerank.hpp"
#include "vreid/tracklet.hpp"

using namespace vreid;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

EmbeddingSet random_unit_set(std::size_t n, std::size_t dim,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  EmbeddingSet set;
  set.dim = dim;
  set.features.resize(n * dim);
  for (auto& v : set.features) v = dist(rng);
  for (std::size_t i = 0; i < n; ++i) {
    set.ids.push_back("p" + std::to_string(i));
    set.split.push_back(Split::Gallery);
    set.tracklet_id.emplace_back();
    set.camera_id.emplace_back();
    set.vehicle_id.emplace_back();
  }
  l2_normalize_in_place(set);
  return set;
}

void report(const char* kernel, double serial_s, double parallel_s,
            double max_diff) {
  std::printf("%-22s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   max|diff| %.3g\n",
              kernel, serial_s * 1e3, parallel_s * 1e3,
              parallel_s > 0.0 ? serial_s / parallel_s : 0.0, max_diff);
}

void bench_distmat(std::size_t na, std::size_t nb, std::size_t dim, int repeat) {
  const auto a = random_unit_set(na, dim, 1);
  const auto b = random_unit_set(nb, dim, 2);

  std::vector<double> serial_out(na * nb), parallel_out(na * nb);

  double t0 = now_seconds();
  for (int r = 0; r < repeat; ++r) {
    ref::distance_matrix_naive(a.features.data(), na, b.features.data(), nb,
                               dim, Metric::Euclidean, serial_out.data());
  }
  const double serial_s = (now_seconds() - t0) / repeat;

  t0 = now_seconds();
  for (int r = 0; r < repeat; ++r) {
    pairwise_distances(a.features.data(), na, b.features.data(), nb, dim,
                       Metric::Euclidean, parallel_out.data());
  }
  const double parallel_s = (now_seconds() - t0) / repeat;

  double max_diff = 0.0;
  for (std::size_t i = 0; i < serial_out.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(serial_out[i] - parallel_out[i]));
  }
  report("distance_matrix", serial_s, parallel_s, max_diff);
}

void bench_topk(std::size_t rows, std::size_t cols, std::size_t k, int repeat) {
  const auto a = random_unit_set(rows, 8, 3);
  const auto b = random_unit_set(cols, 8, 4);
  const auto dm = distance_matrix(a, b, Metric::Euclidean);

  double t0 = now_seconds();
  std::vector<std::vector<std::uint32_t>> serial_out;
  for (int r = 0; r < repeat; ++r) serial_out = ref::top_k_full_sort(dm, k);
  const double serial_s = (now_seconds() - t0) / repeat;

  t0 = now_seconds();
  std::vector<std::vector<std::uint32_t>> parallel_out;
  for (int r = 0; r < repeat; ++r) parallel_out = top_k_neighbors(dm, k);
  const double parallel_s = (now_seconds() - t0) / repeat;

  report("top_k_neighbors", serial_s, parallel_s,
         serial_out == parallel_out ? 0.0 : 1.0);
}

void bench_rerank(std::size_t nq, std::size_t ng, int repeat) {
  const auto q = random_unit_set(nq, 32, 5);
  const auto g = random_unit_set(ng, 32, 6);
  const auto qg = distance_matrix(q, g, Metric::Euclidean);
  const auto qq = distance_matrix(q, q, Metric::Euclidean);
  const auto gg = distance_matrix(g, g, Metric::Euclidean);

  RerankParams p;
  p.k1 = 20;
  p.k2 = 6;
  p.lambda = 0.3;

  double t0 = now_seconds();
  DistanceMatrix serial_out;
  for (int r = 0; r < repeat; ++r) {
    serial_out = ref::rerank_transliteration(qg, qq, gg, p.k1, p.k2, p.lambda);
  }
  const double serial_s = (now_seconds() - t0) / repeat;

  t0 = now_seconds();
  DistanceMatrix parallel_out;
  for (int r = 0; r < repeat; ++r) parallel_out = rerank(qg, qq, gg, p);
  const double parallel_s = (now_seconds() - t0) / repeat;

  double max_diff = 0.0;
  for (std::size_t i = 0; i < serial_out.values.size(); ++i) {
    max_diff = std::max(max_diff,
                        std::abs(serial_out.values[i] - parallel_out.values[i]));
  }
  report("rerank", serial_s, parallel_s, max_diff);
}

void bench_aggregation(std::size_t n_tracks, std::size_t track_len,
                       std::size_t dim, int repeat) {
  const std::size_t frames = n_tracks * track_len;
  const auto gallery = random_unit_set(frames, dim, 7);
  const auto queries = random_unit_set(64, dim, 8);
  const auto dist_qf = distance_matrix(queries, gallery, Metric::Euclidean);

  TrackletIndex index;
  for (std::size_t t = 0; t < n_tracks; ++t) {
    TrackletIndex::Tracklet tr;
    tr.id = "t" + std::to_string(t);
    for (std::size_t f = 0; f < track_len; ++f) {
      tr.frames.push_back(t * track_len + f);
    }
    index.tracklets.push_back(std::move(tr));
  }

  // Serial baseline: per-track loop mean via the reference helper.
  double t0 = now_seconds();
  std::vector<double> serial_feat;
  for (int r = 0; r < repeat; ++r) {
    serial_feat.clear();
    for (const auto& tr : index.tracklets) {
      auto mean = ref::mean_of_rows(gallery, tr.frames);
      double norm = 0.0;
      for (double v : mean) norm += v * v;
      norm = std::sqrt(norm);
      for (double v : mean) serial_feat.push_back(v / norm);
    }
  }
  const double serial_s = (now_seconds() - t0) / repeat;

  t0 = now_seconds();
  TrackFeatureSet parallel_feat;
  for (int r = 0; r < repeat; ++r) {
    parallel_feat = average_feature(gallery, index);
  }
  const double parallel_s = (now_seconds() - t0) / repeat;

  double max_diff = 0.0;
  for (std::size_t i = 0; i < serial_feat.size(); ++i) {
    max_diff =
        std::max(max_diff, std::abs(serial_feat[i] - parallel_feat.features[i]));
  }
  report("average_feature", serial_s, parallel_s, max_diff);

  t0 = now_seconds();
  TrackFeatureSet wf;
  for (int r = 0; r < repeat; ++r) {
    wf = weighted_feature(gallery, index, dist_qf, 0.2);
  }
  std::printf("%-22s (no serial twin)       parallel %8.3f ms\n",
              "weighted_feature", (now_seconds() - t0) / repeat * 1e3);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vreid kernel benchmark: OpenMP kernels vs serial reference"};
  std::size_t n = 2000;
  std::size_t dim = 256;
  int repeat = 3;
  int threads = 0;
  app.add_option("--n", n, "Problem size (gallery rows)");
  app.add_option("--dim", dim, "Feature dimension");
  app.add_option("--repeat", repeat, "Repetitions per kernel");
  app.add_option("--threads", threads, "Thread count override");
  CLI11_PARSE(app, argc, argv);

  set_threads(threads);
  std::printf("threads: %d\n", max_threads());

  bench_distmat(n / 4, n, dim, repeat);
  bench_topk(n / 4, n, 100, repeat);
  bench_rerank(64, 256, repeat);
  bench_aggregation(n / 8, 6, dim, repeat);
  return 0;
}
