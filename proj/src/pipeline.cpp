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
#include "vreid/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>

#include "vreid/core.hpp"
#include "vreid/eval.hpp"
#include "vreid/io.hpp"
#include "vreid/mining.hpp"
#include "vreid/synth.hpp"
#include "vreid/tracklet.hpp"
#include "vreid/version.hpp"

namespace vreid {

namespace fs = std::filesystem;
using nlohmann::json;

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path + ": bad JSON: " + e.what());
  }
  return from_json(std::move(j));
}

PipelineConfig PipelineConfig::from_json(json j) {
  if (!j.is_object()) throw FormatError("pipeline config must be a JSON object");
  PipelineConfig cfg;
  cfg.doc = std::move(j);
  return cfg;
}

std::uint64_t PipelineConfig::seed() const {
  return doc.value("seed", std::uint64_t{0});
}

void PipelineConfig::set_seed(std::uint64_t s) { doc["seed"] = s; }

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

json RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["version"] = version;
  j["ok"] = ok;
  if (!failed_stage.empty()) j["failed_stage"] = failed_stage;
  j["threads"] = max_threads();
  j["stages"] = json::array();
  for (const auto& s : stages) {
    json sj;
    sj["type"] = s.type;
    sj["name"] = s.name;
    sj["seconds"] = s.seconds;
    sj["ok"] = s.ok;
    if (!s.error.empty()) sj["error"] = s.error;
    if (!s.details.empty()) sj["details"] = s.details;
    j["stages"].push_back(sj);
  }
  return j;
}

namespace {

// Everything the stages hand to each other.
struct PipelineState {
  std::optional<SynthScenario> scenario;
  std::optional<EmbeddingSet> query;
  std::optional<EmbeddingSet> gallery;
  std::optional<TrackletIndex> index;
  std::optional<RankedResult> result;
  std::optional<PseudoLabelSet> labels;
  std::vector<std::string> combined_ids;  // query then gallery, for labels
};

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

SynthScenario scenario_from_stage(const json& stage, std::uint64_t seed) {
  SynthScenario sc;
  if (stage.contains("preset")) {
    sc = preset(stage["preset"].get<std::string>());
  }
  if (stage.contains("seed")) {
    sc.seed = stage["seed"].get<std::uint64_t>();
  } else {
    sc.seed = seed;
  }
  if (stage.contains("n_ids")) sc.n_ids = stage["n_ids"];
  if (stage.contains("dim")) sc.dim = stage["dim"];
  if (stage.contains("queries_per_id")) sc.queries_per_id = stage["queries_per_id"];
  if (stage.contains("gallery_per_id_min")) sc.gallery_per_id_min = stage["gallery_per_id_min"];
  if (stage.contains("gallery_per_id_max")) sc.gallery_per_id_max = stage["gallery_per_id_max"];
  if (stage.contains("tracklet_len_min")) sc.tracklet_len_min = stage["tracklet_len_min"];
  if (stage.contains("tracklet_len_max")) sc.tracklet_len_max = stage["tracklet_len_max"];
  if (stage.contains("noise_sigma")) sc.noise_sigma = stage["noise_sigma"];
  if (stage.contains("center_min_dist")) sc.center_min_dist = stage["center_min_dist"];
  if (stage.contains("corrupt_fraction")) sc.corrupt_fraction = stage["corrupt_fraction"];
  if (stage.contains("corrupt_sigma")) sc.corrupt_sigma = stage["corrupt_sigma"];
  if (stage.contains("n_cameras")) sc.n_cameras = stage["n_cameras"];
  return sc;
}

void split_state(const EmbeddingSet& all, PipelineState& state) {
  const auto q_rows = all.rows_with_split(Split::Query);
  const auto g_rows = all.rows_with_split(Split::Gallery);
  if (q_rows.empty() || g_rows.empty()) {
    throw InputError("pipeline: the embedding set needs query and gallery rows");
  }
  state.query = all.select(q_rows);
  state.gallery = all.select(g_rows);
  state.index = TrackletIndex::from_metadata(*state.gallery);
  state.combined_ids = state.query->ids;
  state.combined_ids.insert(state.combined_ids.end(),
                            state.gallery->ids.begin(),
                            state.gallery->ids.end());
}

RerankParams rerank_from_stage(const json& stage) {
  RerankParams rr;
  if (stage.contains("k1")) rr.k1 = stage["k1"];
  if (stage.contains("k2")) rr.k2 = stage["k2"];
  if (stage.contains("lambda")) rr.lambda = stage["lambda"];
  if (stage.contains("float32_workspace"))
    rr.float32_workspace = stage["float32_workspace"];
  return rr;
}

void require(bool cond, const std::string& what) {
  if (!cond) throw InputError("pipeline: " + what);
}

void run_stage(const json& stage, std::uint64_t seed, const fs::path& out_dir,
               PipelineState& state, StageRecord& rec) {
  const std::string type = stage.at("type").get<std::string>();

  if (type == "synth") {
    SynthScenario sc = scenario_from_stage(stage, seed);
    EmbeddingSet all = generate(sc);
    const std::string base = stage.value("out", std::string("embeddings"));
    save_embeddings(all, (out_dir / (base + ".emb1")).string(),
                    (out_dir / (base + ".meta.jsonl")).string());
    rec.details["n_rows"] = all.size();
    rec.details["dim"] = all.dim;
    l2_normalize_in_place(all);
    state.scenario = sc;
    split_state(all, state);
    return;
  }

  if (type == "load") {
    EmbeddingSet all = load_embeddings(stage.at("emb").get<std::string>(),
                                       stage.at("meta").get<std::string>());
    rec.details["n_rows"] = all.size();
    rec.details["dim"] = all.dim;
    if (stage.value("l2_normalize", true)) l2_normalize_in_place(all);
    split_state(all, state);
    return;
  }

  if (type == "distmat") {
    require(state.query && state.gallery, "distmat stage needs loaded embeddings");
    const Metric metric =
        metric_from_string(stage.value("metric", std::string("euclidean")));
    Timer t;
    const DistanceMatrix dm = distance_matrix(*state.query, *state.gallery, metric);
    const double secs = t.seconds();
    const double entries = static_cast<double>(dm.rows * dm.cols);
    rec.details["entries"] = entries;
    rec.details["seconds"] = secs;
    rec.details["entries_per_sec"] = secs > 0.0 ? entries / secs : 0.0;
    save_distmat(dm, (out_dir / stage.value("out", std::string("distmat"))).string());
    return;
  }

  if (type == "trr" || type == "rr") {
    require(state.query && state.gallery, "ranking stage needs loaded embeddings");
    const Metric metric =
        metric_from_string(stage.value("metric", std::string("euclidean")));
    const std::size_t top_k = stage.value("top_k", std::size_t{100});
    const RerankParams rr = rerank_from_stage(stage);
    const std::string agg = stage.value("aggregation",
                                        type == "rr" ? std::string("none")
                                                     : std::string("wf"));

    // The query-to-gallery matrix dominates the cost; its throughput is the
    // number the manifest reports.
    Timer t;
    const DistanceMatrix probe_gallery =
        distance_matrix(*state.query, *state.gallery, metric);
    const double dm_secs = t.seconds();
    const double entries =
        static_cast<double>(probe_gallery.rows * probe_gallery.cols);
    rec.details["distmat_entries"] = entries;
    rec.details["distmat_seconds"] = dm_secs;
    rec.details["distmat_entries_per_sec"] =
        dm_secs > 0.0 ? entries / dm_secs : 0.0;

    if (agg == "none") {
      const DistanceMatrix dist_qq =
          distance_matrix(*state.query, *state.query, metric);
      const DistanceMatrix dist_gg =
          distance_matrix(*state.gallery, *state.gallery, metric);
      state.result =
          rank_by_distance(rerank(probe_gallery, dist_qq, dist_gg, rr), top_k);
    } else {
      TrrOptions opts;
      opts.aggregation = agg == "af" ? TrackFeatureSet::Aggregation::Average
                                     : TrackFeatureSet::Aggregation::Weighted;
      if (agg != "af" && agg != "wf") {
        throw ParamError("pipeline: unknown aggregation \"" + agg + "\"");
      }
      opts.row_threshold = stage.value("row_threshold", 0.2);
      opts.rr = rr;
      opts.metric = metric;
      opts.top_k = top_k;
      state.result = trr_pipeline(*state.query, *state.gallery, *state.index, opts);
    }
    if (stage.contains("out")) {
      save_rank_file(*state.result,
                     (out_dir / stage["out"].get<std::string>()).string());
    }
    rec.details["queries"] = state.result->query_ids.size();
    return;
  }

  if (type == "mine") {
    require(state.query && state.gallery, "mine stage needs loaded embeddings");
    MiningParams mp;
    if (stage.value("auto_thresholds", false)) {
      require(state.scenario.has_value(),
              "auto_thresholds needs a synth stage");
      mp = suggested_mining(*state.scenario);
    }
    if (stage.contains("dn")) mp.negative_threshold = stage["dn"];
    if (stage.contains("dp")) mp.positive_threshold = stage["dp"];
    mp.seed = stage.contains("seed") ? stage["seed"].get<std::uint64_t>() : seed;
    if (stage.contains("restarts")) mp.restarts = stage["restarts"];
    if (stage.contains("iterate")) mp.iterate_stage2 = stage["iterate"];
    if (stage.contains("metric")) {
      mp.metric = metric_from_string(stage["metric"].get<std::string>());
    }
    state.labels = identity_mine(*state.query, *state.gallery, mp);
    save_labels(*state.labels, state.combined_ids,
                (out_dir / stage.value("out", std::string("labels.jsonl"))).string());
    rec.details["centers"] = state.labels->centers.size();
    rec.details["labeled"] = state.labels->assignments.size();
    rec.details["dn"] = mp.negative_threshold;
    rec.details["dp"] = mp.positive_threshold;
    return;
  }

  if (type == "kmeans") {
    require(state.query && state.gallery, "kmeans stage needs loaded embeddings");
    const EmbeddingSet all = concat(*state.query, *state.gallery);
    const std::size_t k = stage.at("k").get<std::size_t>();
    const std::uint64_t kseed =
        stage.contains("seed") ? stage["seed"].get<std::uint64_t>() : seed;
    const KmeansResult km =
        kmeans_baseline(all, k, kseed, stage.value("max_iter", 100));
    PseudoLabelSet as_labels;
    as_labels.params.seed = kseed;
    for (std::size_t i = 0; i < km.assignment.size(); ++i) {
      as_labels.assignments.emplace_back(static_cast<std::uint32_t>(i),
                                         km.assignment[i]);
    }
    save_labels(as_labels, state.combined_ids,
                (out_dir / stage.value("out", std::string("kmeans_labels.jsonl"))).string());
    rec.details["k"] = k;
    rec.details["iterations"] = km.iterations;
    rec.details["converged"] = km.converged;
    rec.details["inertia"] = km.inertia;
    return;
  }

  if (type == "eval") {
    require(state.result.has_value(), "eval stage needs a ranking");
    require(state.query && state.gallery, "eval stage needs loaded embeddings");
    EvalOptions opts;
    opts.k = stage.value("k", std::size_t{100});
    if (stage.contains("cmc_ranks")) {
      opts.cmc_ranks = stage["cmc_ranks"].get<std::vector<int>>();
    }
    opts.exclude_same_camera = stage.value("exclude_same_camera", false);
    const GroundTruth gt = GroundTruth::from_sets(*state.query, *state.gallery);
    const EvalReport report = evaluate(*state.result, gt, opts);
    json rj;
    rj["map_at_k"] = report.map_at_k;
    rj["k"] = opts.k;
    rj["evaluated_queries"] = report.evaluated_queries;
    rj["skipped_queries"] = report.skipped_queries;
    for (const auto& [rank, rate] : report.cmc) {
      rj["cmc"][std::to_string(rank)] = rate;
    }
    std::ofstream out(out_dir / stage.value("out", std::string("report.json")),
                      std::ios::trunc);
    out << rj.dump(2) << '\n';
    rec.details["map_at_k"] = report.map_at_k;
    return;
  }

  if (type == "submit") {
    require(state.result.has_value(), "submit stage needs a ranking");
    write_submission(*state.result,
                     (out_dir / stage.value("out", std::string("submission.txt"))).string(),
                     stage.value("one_based", true),
                     stage.value("pad_to", std::size_t{100}));
    return;
  }

  throw ParamError("pipeline: unknown stage type \"" + type + "\"");
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);

  RunManifest manifest;
  manifest.config_hash = fnv1a_hex(config.doc.dump());
  manifest.seed = config.seed();
  manifest.version = VREID_VERSION;
  manifest.ok = true;

  PipelineState state;
  const json stages = config.doc.value("stages", json::array());
  std::size_t ordinal = 0;
  for (const auto& stage : stages) {
    StageRecord rec;
    rec.type = stage.value("type", std::string("?"));
    rec.name = stage.value("name", rec.type + "#" + std::to_string(ordinal));
    ++ordinal;
    Timer t;
    try {
      run_stage(stage, manifest.seed, out_dir, state, rec);
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      rec.seconds = t.seconds();
      manifest.stages.push_back(rec);
      manifest.ok = false;
      manifest.failed_stage = rec.name;
      break;
    }
    rec.seconds = t.seconds();
    manifest.stages.push_back(rec);
  }

  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::trunc);
  out << manifest.to_json().dump(2) << '\n';
  return manifest;
}

void write_submission(const RankedResult& result, const std::string& path,
                      bool one_based, std::size_t pad_to) {
  result.validate();
  const std::size_t n_gallery = result.gallery_ids.size();
  const std::size_t target = std::min(pad_to, n_gallery);

  RankedResult padded = result;
  for (auto& list : padded.ranks) {
    if (list.size() > target) {
      list.resize(target);
    } else if (list.size() < target) {
      // Fill with the lowest-index gallery items not yet listed.
      std::vector<char> used(n_gallery, 0);
      for (std::uint32_t g : list) used[g] = 1;
      for (std::uint32_t g = 0; list.size() < target; ++g) {
        if (!used[g]) list.push_back(g);
      }
    }
  }
  save_rank_file(padded, path, one_based);
}

}  // namespace vreid
