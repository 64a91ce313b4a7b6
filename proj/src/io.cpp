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
#include "vreid/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace vreid {

static_assert(std::numeric_limits<float>::is_iec559,
              "EMB1 requires IEEE-754 float32");

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32_le(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void save_emb1(const std::vector<double>& values, std::size_t rows,
               std::size_t cols, const std::string& path) {
  if (values.size() != rows * cols) {
    throw IntegrityError("save_emb1: buffer size does not match rows*cols");
  }
  if (rows > 0xffffffffull || cols > 0xffffffffull) {
    throw ParamError("save_emb1: dimensions exceed the u32 header");
  }
  std::string buf;
  buf.reserve(12 + values.size() * 4);
  buf.append(kMagic, 4);
  put_u32_le(buf, static_cast<std::uint32_t>(rows));
  put_u32_le(buf, static_cast<std::uint32_t>(cols));
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    put_u32_le(buf, bits);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("short write: " + path);
}

Emb1Data load_emb1(const std::string& path) {
  const std::string buf = read_all(path);
  if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw FormatError("not an EMB1 file: " + path);
  }
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  const std::uint32_t rows = get_u32_le(p + 4);
  const std::uint32_t cols = get_u32_le(p + 8);
  const std::size_t expect =
      12 + static_cast<std::size_t>(rows) * cols * 4;
  if (buf.size() != expect) {
    throw IntegrityError("EMB1 payload size mismatch in " + path +
                         ": header says " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " but file holds " +
                         std::to_string((buf.size() - 12) / 4) + " values");
  }
  Emb1Data data;
  data.rows = rows;
  data.cols = cols;
  data.values.resize(static_cast<std::size_t>(rows) * cols);
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    const std::uint32_t bits = get_u32_le(p + 12 + i * 4);
    data.values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return data;
}

std::vector<MetaRecord> load_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open metadata file: " + path);
  std::vector<MetaRecord> out;
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
    MetaRecord rec;
    if (!j.contains("id") || !j["id"].is_string()) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": missing string key \"id\"");
    }
    if (!j.contains("split") || !j["split"].is_string()) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": missing string key \"split\"");
    }
    rec.id = j["id"].get<std::string>();
    rec.split = split_from_string(j["split"].get<std::string>());
    if (j.contains("tracklet_id")) rec.tracklet_id = j["tracklet_id"];
    if (j.contains("camera_id")) rec.camera_id = j["camera_id"];
    if (j.contains("vehicle_id")) rec.vehicle_id = j["vehicle_id"];
    out.push_back(std::move(rec));
  }
  return out;
}

void save_metadata(const std::vector<MetaRecord>& records,
                   const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  for (const auto& rec : records) {
    nlohmann::json j;
    j["id"] = rec.id;
    j["split"] = to_string(rec.split);
    if (!rec.tracklet_id.empty()) j["tracklet_id"] = rec.tracklet_id;
    if (!rec.camera_id.empty()) j["camera_id"] = rec.camera_id;
    if (!rec.vehicle_id.empty()) j["vehicle_id"] = rec.vehicle_id;
    out << j.dump() << '\n';
  }
}

EmbeddingSet load_embeddings(const std::string& emb_path,
                             const std::string& meta_path) {
  Emb1Data data = load_emb1(emb_path);
  std::vector<MetaRecord> meta = load_metadata(meta_path);
  if (meta.size() != data.rows) {
    throw IntegrityError("metadata/embedding count mismatch: " +
                         std::to_string(meta.size()) + " records vs " +
                         std::to_string(data.rows) + " rows");
  }
  EmbeddingSet set;
  set.dim = data.cols;
  set.features = std::move(data.values);
  set.ids.reserve(meta.size());
  for (auto& rec : meta) {
    set.ids.push_back(std::move(rec.id));
    set.split.push_back(rec.split);
    set.tracklet_id.push_back(std::move(rec.tracklet_id));
    set.camera_id.push_back(std::move(rec.camera_id));
    set.vehicle_id.push_back(std::move(rec.vehicle_id));
  }
  set.validate();
  return set;
}

void save_embeddings(const EmbeddingSet& set, const std::string& emb_path,
                     const std::string& meta_path) {
  set.validate();
  save_emb1(set.features, set.size(), set.dim, emb_path);
  std::vector<MetaRecord> meta(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    meta[i].id = set.ids[i];
    meta[i].split = set.split[i];
    meta[i].tracklet_id = set.tracklet_id[i];
    meta[i].camera_id = set.camera_id[i];
    meta[i].vehicle_id = set.vehicle_id[i];
  }
  save_metadata(meta, meta_path);
}

void save_distmat(const DistanceMatrix& dm, const std::string& prefix) {
  save_emb1(dm.values, dm.rows, dm.cols, prefix + ".emb1");
  nlohmann::json j;
  j["kind"] = "distmat";
  j["metric"] = to_string(dm.metric);
  j["row_ids"] = dm.row_ids;
  j["col_ids"] = dm.col_ids;
  std::ofstream out(prefix + ".meta.json", std::ios::trunc);
  if (!out) {
    throw FormatError("cannot open file for writing: " + prefix +
                      ".meta.json");
  }
  out << j.dump(2) << '\n';
}

DistanceMatrix load_distmat(const std::string& prefix) {
  Emb1Data data = load_emb1(prefix + ".emb1");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_all(prefix + ".meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(prefix + ".meta.json: bad JSON: " + e.what());
  }
  if (j.value("kind", "") != "distmat") {
    throw FormatError(prefix + ".meta.json: not a distmat descriptor");
  }
  DistanceMatrix dm;
  dm.rows = data.rows;
  dm.cols = data.cols;
  dm.values = std::move(data.values);
  dm.metric = metric_from_string(j.at("metric").get<std::string>());
  dm.row_ids = j.value("row_ids", std::vector<std::string>{});
  dm.col_ids = j.value("col_ids", std::vector<std::string>{});
  if (!dm.row_ids.empty() && dm.row_ids.size() != dm.rows) {
    throw IntegrityError(prefix + ": row_ids count does not match matrix");
  }
  if (!dm.col_ids.empty() && dm.col_ids.size() != dm.cols) {
    throw IntegrityError(prefix + ": col_ids count does not match matrix");
  }
  return dm;
}

void save_rank_file(const RankedResult& result, const std::string& path,
                    bool one_based) {
  result.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  const std::uint32_t offset = one_based ? 1u : 0u;
  for (const auto& list : result.ranks) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i) out << ' ';
      out << (list[i] + offset);
    }
    out << '\n';
  }
}

std::vector<std::vector<std::uint32_t>> load_rank_file(
    const std::string& path, std::size_t gallery_count, bool one_based) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open rank file: " + path);
  std::vector<std::vector<std::uint32_t>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<std::uint32_t> list;
    long long v;
    while (ss >> v) {
      const long long lo = one_based ? 1 : 0;
      const long long hi = lo + static_cast<long long>(gallery_count) - 1;
      if (v < lo || v > hi) {
        throw IntegrityError(path + ":" + std::to_string(lineno) +
                             ": gallery index " + std::to_string(v) +
                             " out of range");
      }
      list.push_back(static_cast<std::uint32_t>(v - lo));
    }
    if (!ss.eof()) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": non-numeric token");
    }
    out.push_back(std::move(list));
  }
  return out;
}

}  // namespace vreid
