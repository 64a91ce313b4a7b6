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

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vreid/core.hpp"
#include "vreid/types.hpp"

namespace testutil {

/// Random embedding set with placeholder metadata. Values drawn in [-1, 1).
inline vreid::EmbeddingSet random_set(std::size_t n, std::size_t dim,
                                      std::uint64_t seed,
                                      vreid::Split split = vreid::Split::Gallery) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  vreid::EmbeddingSet set;
  set.dim = dim;
  set.features.resize(n * dim);
  for (auto& v : set.features) v = dist(rng);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%06zu_%llu", i,
                  static_cast<unsigned long long>(seed));
    set.ids.emplace_back(buf);
    set.split.push_back(split);
    set.tracklet_id.emplace_back();
    set.camera_id.emplace_back();
    set.vehicle_id.emplace_back();
  }
  return set;
}

/// Set built from explicit row data.
inline vreid::EmbeddingSet make_set(const std::vector<std::vector<double>>& rows,
                                    vreid::Split split = vreid::Split::Gallery) {
  vreid::EmbeddingSet set;
  set.dim = rows.empty() ? 0 : rows[0].size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    set.ids.push_back("r" + std::to_string(i));
    set.features.insert(set.features.end(), rows[i].begin(), rows[i].end());
    set.split.push_back(split);
    set.tracklet_id.emplace_back();
    set.camera_id.emplace_back();
    set.vehicle_id.emplace_back();
  }
  return set;
}

/// Square all-pairs matrix from explicit point coordinates.
inline vreid::DistanceMatrix square_distances(
    const std::vector<std::vector<double>>& points) {
  auto set = make_set(points);
  return vreid::distance_matrix(set, set, vreid::Metric::Euclidean);
}

/// Unique temp directory for file-format tests, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    path_ = std::filesystem::temp_directory_path() /
            (stem + "_" + std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

}  // namespace testutil
