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
#include "vreid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace vreid {

namespace {

// Box-Muller on top of mt19937_64 so the stream does not depend on the
// standard library's distribution internals.
class Gaussian {
 public:
  explicit Gaussian(std::mt19937_64& rng) : rng_(rng) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = unit_open();
    const double u2 = unit_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = two_pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double uniform() { return unit_open(); }

  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection keeps the draw unbiased and stream-stable.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = rng_();
    } while (v >= limit);
    return v % n;
  }

 private:
  double unit_open() {
    // (0, 1]: never zero, so log() stays finite.
    return (static_cast<double>(rng_() >> 11) + 1.0) / 9007199254740993.0;
  }

  std::mt19937_64& rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

void unit_vector(Gaussian& g, std::size_t dim, double* out) {
  double sq = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    out[d] = g();
    sq += out[d] * out[d];
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t d = 0; d < dim; ++d) out[d] *= inv;
}

// center + sigma * noise, renormalized, rounded to float32 so file round
// trips are bit-exact.
void noisy_point(Gaussian& g, const double* center, std::size_t dim,
                 double sigma, double* out) {
  double sq = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    out[d] = center[d] + sigma * g();
    sq += out[d] * out[d];
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t d = 0; d < dim; ++d) {
    out[d] = static_cast<double>(static_cast<float>(out[d] * inv));
  }
}

std::string tag(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05zu", prefix, i);
  return buf;
}

// Equal split with the remainder going to the first ids.
std::size_t exact_count(std::size_t total, std::size_t n_ids, std::size_t id) {
  const std::size_t base = total / n_ids;
  const std::size_t extra = total % n_ids;
  return base + (id < extra ? 1 : 0);
}

}  // namespace

EmbeddingSet generate(const SynthScenario& sc) {
  if (sc.n_ids == 0 || sc.dim == 0) {
    throw ParamError("synth: n_ids and dim must be positive");
  }
  if (sc.gallery_per_id_min > sc.gallery_per_id_max ||
      sc.tracklet_len_min > sc.tracklet_len_max || sc.tracklet_len_min == 0) {
    throw ParamError("synth: bad count distribution bounds");
  }
  std::mt19937_64 rng(sc.seed);
  Gaussian g(rng);

  // 1. Cluster centers on the unit sphere, min-separation by rejection.
  std::vector<double> centers(sc.n_ids * sc.dim);
  std::size_t attempts = 0;
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    double* c = centers.data() + id * sc.dim;
    for (;;) {
      if (++attempts > sc.center_retry_limit) {
        throw GenerationError(
            "synth: could not place " + std::to_string(sc.n_ids) +
            " centers with separation " + std::to_string(sc.center_min_dist) +
            " in dimension " + std::to_string(sc.dim));
      }
      unit_vector(g, sc.dim, c);
      bool ok = true;
      for (std::size_t prev = 0; prev < id && ok; ++prev) {
        const double* p = centers.data() + prev * sc.dim;
        double sq = 0.0;
        for (std::size_t d = 0; d < sc.dim; ++d) {
          const double diff = c[d] - p[d];
          sq += diff * diff;
        }
        ok = sq >= sc.center_min_dist * sc.center_min_dist;
      }
      if (ok) break;
    }
  }

  // 2. Per-id image counts.
  std::vector<std::size_t> n_query(sc.n_ids), n_gallery(sc.n_ids);
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    n_query[id] = sc.exact_query_total
                      ? exact_count(sc.exact_query_total, sc.n_ids, id)
                      : sc.queries_per_id;
  }
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    if (sc.exact_gallery_total) {
      n_gallery[id] = exact_count(sc.exact_gallery_total, sc.n_ids, id);
    } else {
      const std::size_t span = sc.gallery_per_id_max - sc.gallery_per_id_min + 1;
      n_gallery[id] = sc.gallery_per_id_min + g.uniform_index(span);
    }
    if (n_gallery[id] == 0) {
      throw ParamError("synth: every id needs at least one gallery image");
    }
  }

  // 3. Tracklet partition of each id's gallery images.
  std::vector<std::vector<std::size_t>> track_lens(sc.n_ids);
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    std::size_t remaining = n_gallery[id];
    while (remaining > 0) {
      const std::size_t span = sc.tracklet_len_max - sc.tracklet_len_min + 1;
      std::size_t len = sc.tracklet_len_min + g.uniform_index(span);
      len = std::min(len, remaining);
      track_lens[id].push_back(len);
      remaining -= len;
    }
  }

  // 4. Cameras: one per tracklet (tracklets are single-camera), one per query.
  std::vector<std::vector<std::size_t>> track_cam(sc.n_ids);
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    track_cam[id].resize(track_lens[id].size());
    for (auto& cam : track_cam[id]) cam = g.uniform_index(sc.n_cameras);
  }
  std::vector<std::vector<std::size_t>> query_cam(sc.n_ids);
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    query_cam[id].resize(n_query[id]);
    for (auto& cam : query_cam[id]) cam = g.uniform_index(sc.n_cameras);
  }

  // 5. Features: query rows first, then gallery rows by id and tracklet.
  std::size_t total_q = 0, total_g = 0;
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    total_q += n_query[id];
    total_g += n_gallery[id];
  }
  EmbeddingSet set;
  set.dim = sc.dim;
  const std::size_t total = total_q + total_g;
  set.ids.reserve(total);
  set.features.resize(total * sc.dim);
  set.split.reserve(total);
  set.tracklet_id.reserve(total);
  set.camera_id.reserve(total);
  set.vehicle_id.reserve(total);

  std::size_t row = 0;
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    const double* c = centers.data() + id * sc.dim;
    for (std::size_t qi = 0; qi < n_query[id]; ++qi, ++row) {
      noisy_point(g, c, sc.dim, sc.noise_sigma, set.row(row));
      set.ids.push_back(tag("q", row));
      set.split.push_back(Split::Query);
      set.tracklet_id.emplace_back();
      set.camera_id.push_back(tag("c", query_cam[id][qi]));
      set.vehicle_id.push_back(tag("v", id));
    }
  }
  std::size_t track_ordinal = 0;
  for (std::size_t id = 0; id < sc.n_ids; ++id) {
    const double* c = centers.data() + id * sc.dim;
    for (std::size_t ti = 0; ti < track_lens[id].size(); ++ti, ++track_ordinal) {
      const std::string track_name = tag("t", track_ordinal);
      const std::string cam_name = tag("c", track_cam[id][ti]);
      for (std::size_t f = 0; f < track_lens[id][ti]; ++f, ++row) {
        const bool corrupted =
            sc.corrupt_fraction > 0.0 && g.uniform() < sc.corrupt_fraction;
        noisy_point(g, c, sc.dim,
                    corrupted ? sc.corrupt_sigma : sc.noise_sigma,
                    set.row(row));
        set.ids.push_back(tag("g", row - total_q));
        set.split.push_back(Split::Gallery);
        set.tracklet_id.push_back(track_name);
        set.camera_id.push_back(cam_name);
        set.vehicle_id.push_back(tag("v", id));
      }
    }
  }
  set.validate();
  return set;
}

std::vector<SynthScenario> scenario_presets() {
  std::vector<SynthScenario> out;

  SynthScenario ws;
  ws.name = "well_separated";
  ws.n_ids = 100;
  ws.dim = 64;
  ws.queries_per_id = 3;
  ws.gallery_per_id_min = 8;
  ws.gallery_per_id_max = 14;
  ws.tracklet_len_min = 3;
  ws.tracklet_len_max = 6;
  ws.noise_sigma = 0.02;
  ws.center_min_dist = 0.9;
  ws.corrupt_fraction = 0.0;
  ws.seed = 11;
  out.push_back(ws);

  SynthScenario ov;
  ov.name = "overlapping";
  ov.n_ids = 50;
  ov.dim = 32;
  ov.queries_per_id = 3;
  ov.gallery_per_id_min = 10;
  ov.gallery_per_id_max = 16;
  ov.tracklet_len_min = 3;
  ov.tracklet_len_max = 6;
  ov.noise_sigma = 0.05;
  ov.center_min_dist = 0.5;
  ov.corrupt_fraction = 0.0;
  ov.seed = 12;
  out.push_back(ov);

  // Low dimension on purpose: clusters crowd the sphere, so a tracklet
  // feature polluted by corrupted frames really does fall behind competing
  // identities instead of staying trivially closest.
  SynthScenario ct;
  ct.name = "corrupted_tracklets";
  ct.n_ids = 40;
  ct.dim = 8;
  ct.queries_per_id = 3;
  ct.gallery_per_id_min = 10;
  ct.gallery_per_id_max = 16;
  ct.tracklet_len_min = 4;
  ct.tracklet_len_max = 8;
  ct.noise_sigma = 0.025;
  ct.center_min_dist = 0.5;
  ct.corrupt_fraction = 0.3;
  ct.corrupt_sigma = 0.8;
  ct.seed = 13;
  out.push_back(ct);

  SynthScenario cf;
  cf.name = "cityflow_scale";
  cf.n_ids = 333;
  cf.dim = 2048;
  cf.exact_query_total = 1052;
  cf.exact_gallery_total = 17238;
  cf.tracklet_len_min = 4;
  cf.tracklet_len_max = 8;
  cf.noise_sigma = 0.002;
  cf.center_min_dist = 0.9;
  cf.corrupt_fraction = 0.1;
  cf.corrupt_sigma = 0.5;
  cf.n_cameras = 40;
  cf.seed = 14;
  out.push_back(cf);

  return out;
}

SynthScenario preset(std::string_view name) {
  for (auto& sc : scenario_presets()) {
    if (sc.name == name) return sc;
  }
  throw ParamError("unknown scenario preset: " + std::string(name));
}

MiningParams suggested_mining(const SynthScenario& sc,
                              std::uint64_t mining_seed) {
  // Same-id pairs sit near sigma*sqrt(2*dim) apart (two independent noise
  // vectors), cross-id pairs near sqrt(delta^2 + 2*sigma^2*dim); the
  // renormalization onto the sphere contracts both by the same factor.
  const double spread2 = 2.0 * sc.noise_sigma * sc.noise_sigma *
                         static_cast<double>(sc.dim);
  const double shrink =
      1.0 / std::sqrt(1.0 + sc.noise_sigma * sc.noise_sigma *
                                static_cast<double>(sc.dim));
  const double intra = std::sqrt(spread2) * shrink;
  const double cross =
      std::sqrt(sc.center_min_dist * sc.center_min_dist + spread2) * shrink;

  MiningParams p;
  p.positive_threshold = intra + 0.30 * (cross - intra);
  p.negative_threshold = intra + 0.70 * (cross - intra);
  p.seed = mining_seed;
  return p;
}

}  // namespace vreid
