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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vreid/types.hpp"

namespace vreid {

/**
 * EMB1 container: bytes 0-3 ASCII "EMB1", bytes 4-7 u32-LE row count,
 * bytes 8-11 u32-LE column count, then rows*cols little-endian float32
 * values, row-major. Doubles are rounded to float32 on write and widened
 * back on read.
 */
void save_emb1(const std::vector<double>& values, std::size_t rows,
               std::size_t cols, const std::string& path);

struct Emb1Data {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

Emb1Data load_emb1(const std::string& path);

/// One parsed metadata record (JSON-lines row). Optional fields are "".
struct MetaRecord {
  std::string id;
  Split split = Split::Gallery;
  std::string tracklet_id;
  std::string camera_id;
  std::string vehicle_id;
};

std::vector<MetaRecord> load_metadata(const std::string& path);
void save_metadata(const std::vector<MetaRecord>& records,
                   const std::string& path);

/**
 * Embedding set = EMB1 file + JSON-lines metadata (one object per row,
 * in row order; keys: id, split, tracklet_id?, camera_id?, vehicle_id?).
 * Features are returned as stored; no implicit normalization.
 */
EmbeddingSet load_embeddings(const std::string& emb_path,
                             const std::string& meta_path);
void save_embeddings(const EmbeddingSet& set, const std::string& emb_path,
                     const std::string& meta_path);

/**
 * Distance matrix container: <prefix>.emb1 holds the values, and
 * <prefix>.meta.json a single JSON object
 * {"kind":"distmat","metric":...,"row_ids":[...],"col_ids":[...]}.
 */
void save_distmat(const DistanceMatrix& dm, const std::string& prefix);
DistanceMatrix load_distmat(const std::string& prefix);

/**
 * Rank-list file: one line per query in query order, space-separated
 * gallery indices (one-based by default), newline-terminated.
 */
void save_rank_file(const RankedResult& result, const std::string& path,
                    bool one_based = true);
std::vector<std::vector<std::uint32_t>> load_rank_file(
    const std::string& path, std::size_t gallery_count, bool one_based = true);

}  // namespace vreid
