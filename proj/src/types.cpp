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
#include "vreid/types.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace vreid {

const char* to_string(Metric m) {
  switch (m) {
    case Metric::Euclidean:
      return "euclidean";
    case Metric::SquaredEuclidean:
      return "squared_euclidean";
    case Metric::CosineDistance:
      return "cosine_distance";
  }
  return "euclidean";
}

Metric metric_from_string(std::string_view s) {
  if (s == "euclidean") return Metric::Euclidean;
  if (s == "squared_euclidean") return Metric::SquaredEuclidean;
  if (s == "cosine_distance") return Metric::CosineDistance;
  throw FormatError("unknown metric tag: " + std::string(s));
}

const char* to_string(Split s) {
  switch (s) {
    case Split::Query:
      return "query";
    case Split::Gallery:
      return "gallery";
    case Split::Train:
      return "train";
  }
  return "gallery";
}

Split split_from_string(std::string_view s) {
  if (s == "query") return Split::Query;
  if (s == "gallery") return Split::Gallery;
  if (s == "train") return Split::Train;
  throw FormatError("unknown split tag: " + std::string(s));
}

std::vector<std::size_t> EmbeddingSet::rows_with_split(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == s) out.push_back(i);
  }
  return out;
}

EmbeddingSet EmbeddingSet::select(std::span<const std::size_t> rows) const {
  EmbeddingSet out;
  out.dim = dim;
  out.ids.reserve(rows.size());
  out.features.reserve(rows.size() * dim);
  for (std::size_t r : rows) {
    if (r >= size()) {
      throw IntegrityError("select: row index " + std::to_string(r) +
                           " out of range");
    }
    out.ids.push_back(ids[r]);
    out.features.insert(out.features.end(), row(r), row(r) + dim);
    out.split.push_back(split[r]);
    out.tracklet_id.push_back(tracklet_id[r]);
    out.camera_id.push_back(camera_id[r]);
    out.vehicle_id.push_back(vehicle_id[r]);
  }
  return out;
}

void EmbeddingSet::validate() const {
  const std::size_t n = ids.size();
  if (n == 0) throw IntegrityError("embedding set is empty");
  if (dim == 0) throw IntegrityError("embedding dimension is zero");
  if (features.size() != n * dim) {
    throw IntegrityError("feature buffer size does not match N*D");
  }
  if (split.size() != n || tracklet_id.size() != n || camera_id.size() != n ||
      vehicle_id.size() != n) {
    throw IntegrityError("metadata arrays do not match row count");
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(n);
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw IntegrityError("duplicate image id: " + id);
    }
  }
}

EmbeddingSet concat(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.dim != b.dim) {
    throw ShapeError("concat: dimension mismatch (" + std::to_string(a.dim) +
                     " vs " + std::to_string(b.dim) + ")");
  }
  EmbeddingSet out = a;
  out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
  out.features.insert(out.features.end(), b.features.begin(),
                      b.features.end());
  out.split.insert(out.split.end(), b.split.begin(), b.split.end());
  out.tracklet_id.insert(out.tracklet_id.end(), b.tracklet_id.begin(),
                         b.tracklet_id.end());
  out.camera_id.insert(out.camera_id.end(), b.camera_id.begin(),
                       b.camera_id.end());
  out.vehicle_id.insert(out.vehicle_id.end(), b.vehicle_id.begin(),
                        b.vehicle_id.end());
  return out;
}

TrackletIndex TrackletIndex::from_metadata(const EmbeddingSet& gallery) {
  TrackletIndex index;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const std::string& tid =
        gallery.tracklet_id[i].empty() ? gallery.ids[i] : gallery.tracklet_id[i];
    auto [it, inserted] = slot.try_emplace(tid, index.tracklets.size());
    if (inserted) {
      index.tracklets.push_back({tid, {}});
    }
    index.tracklets[it->second].frames.push_back(i);
  }
  return index;
}

std::size_t TrackletIndex::total_frames() const {
  std::size_t n = 0;
  for (const auto& t : tracklets) n += t.frames.size();
  return n;
}

void TrackletIndex::validate_partition(std::size_t n_frames) const {
  std::vector<char> seen(n_frames, 0);
  for (const auto& t : tracklets) {
    if (t.frames.empty()) {
      throw InputError("empty tracklet: " + t.id);
    }
    for (std::size_t f : t.frames) {
      if (f >= n_frames) {
        throw CoverageError("tracklet " + t.id + " references frame " +
                            std::to_string(f) + " outside the gallery");
      }
      if (seen[f]) {
        throw CoverageError("frame " + std::to_string(f) +
                            " appears in more than one tracklet");
      }
      seen[f] = 1;
    }
  }
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (!seen[f]) {
      throw CoverageError("gallery frame " + std::to_string(f) +
                          " missing from the tracklet index");
    }
  }
}

void RankedResult::validate() const {
  for (std::size_t q = 0; q < ranks.size(); ++q) {
    std::unordered_set<std::uint32_t> seen;
    seen.reserve(ranks[q].size());
    for (std::uint32_t g : ranks[q]) {
      if (g >= gallery_ids.size()) {
        throw IntegrityError("query " + std::to_string(q) +
                             ": gallery index " + std::to_string(g) +
                             " out of range");
      }
      if (!seen.insert(g).second) {
        throw IntegrityError("query " + std::to_string(q) +
                             ": duplicate gallery index " + std::to_string(g));
      }
    }
  }
}

}  // namespace vreid
