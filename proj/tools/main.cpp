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
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>

#include "vreid/core.hpp"
#include "vreid/eval.hpp"
#include "vreid/io.hpp"
#include "vreid/mining.hpp"
#include "vreid/pipeline.hpp"
#include "vreid/rerank.hpp"
#include "vreid/synth.hpp"
#include "vreid/tracklet.hpp"
#include "vreid/version.hpp"

namespace {

using namespace vreid;

struct LoadedSets {
  EmbeddingSet query;
  EmbeddingSet gallery;
  std::vector<std::string> combined_ids;
};

LoadedSets load_query_gallery(const std::string& emb, const std::string& meta,
                              bool normalize) {
  EmbeddingSet all = load_embeddings(emb, meta);
  if (normalize) l2_normalize_in_place(all);
  LoadedSets out;
  const auto q = all.rows_with_split(Split::Query);
  const auto g = all.rows_with_split(Split::Gallery);
  if (q.empty() || g.empty()) {
    throw InputError("need both query and gallery rows in " + meta);
  }
  out.query = all.select(q);
  out.gallery = all.select(g);
  out.combined_ids = out.query.ids;
  out.combined_ids.insert(out.combined_ids.end(), out.gallery.ids.begin(),
                          out.gallery.ids.end());
  return out;
}

EmbeddingSet slice_by_name(const EmbeddingSet& all, const std::string& which) {
  if (which == "all") return all;
  const auto rows = all.rows_with_split(split_from_string(which));
  if (rows.empty()) throw InputError("no rows with split \"" + which + "\"");
  return all.select(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicle re-identification post-processing toolkit"};
  app.set_version_flag("--version", VREID_VERSION);
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "Thread count (overrides OMP_NUM_THREADS)");

  std::string emb, meta, out_path, out_meta;
  bool no_normalize = false;

  // -------------------------------------------------- synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario");
  std::string preset_name;
  std::optional<std::size_t> n_ids, dim;
  std::optional<double> sigma, delta, rho, sigma_c;
  std::uint64_t seed = 0;
  synth_cmd->add_option("--preset", preset_name,
                        "well_separated | overlapping | corrupted_tracklets | "
                        "cityflow_scale");
  synth_cmd->add_option("--n-ids", n_ids, "Identity count override");
  synth_cmd->add_option("--dim", dim, "Feature dimension override");
  synth_cmd->add_option("--sigma", sigma, "Intra-cluster noise override");
  synth_cmd->add_option("--delta", delta, "Center separation override");
  synth_cmd->add_option("--rho", rho, "Corrupted-frame fraction override");
  synth_cmd->add_option("--sigma-c", sigma_c, "Corruption noise override");
  auto* synth_seed = synth_cmd->add_option("--seed", seed, "Generation seed");
  synth_cmd->add_option("--out", out_path, "Output .emb1 path")->required();
  synth_cmd->add_option("--meta", out_meta, "Output metadata path")->required();

  // -------------------------------------------------- distmat
  auto* distmat_cmd =
      app.add_subcommand("distmat", "Compute a distance matrix");
  std::string rows_split = "query", cols_split = "gallery";
  std::string metric_name = "euclidean";
  distmat_cmd->add_option("--emb", emb, "Embedding file")->required();
  distmat_cmd->add_option("--meta", meta, "Metadata file")->required();
  distmat_cmd->add_option("--rows", rows_split, "query|gallery|train|all");
  distmat_cmd->add_option("--cols", cols_split, "query|gallery|train|all");
  distmat_cmd->add_option("--metric", metric_name,
                          "euclidean|squared_euclidean|cosine_distance");
  distmat_cmd->add_flag("--no-normalize", no_normalize,
                        "Skip L2 normalization of the features");
  distmat_cmd->add_option("--out", out_path, "Output container prefix")
      ->required();

  // -------------------------------------------------- rerank
  auto* rerank_cmd =
      app.add_subcommand("rerank", "k-reciprocal re-ranking of a distance matrix");
  std::string in_prefix, qq_prefix, gg_prefix;
  RerankParams rr;
  rerank_cmd->add_option("--in", in_prefix, "Probe/gallery container prefix")
      ->required();
  rerank_cmd->add_option("--qq", qq_prefix, "Probe square container prefix")
      ->required();
  rerank_cmd->add_option("--gg", gg_prefix, "Gallery square container prefix")
      ->required();
  rerank_cmd->add_option("--k1", rr.k1, "Reciprocal neighborhood size");
  rerank_cmd->add_option("--k2", rr.k2, "Local query expansion size");
  rerank_cmd->add_option("--lambda", rr.lambda, "Original-distance mixing weight");
  rerank_cmd->add_flag("--float32", rr.float32_workspace,
                       "Store the probe+gallery square matrix in float32");
  rerank_cmd->add_option("--out", out_path, "Output container prefix")
      ->required();

  // -------------------------------------------------- trr
  auto* trr_cmd =
      app.add_subcommand("trr", "Tracklet-level re-ranking to an image ranking");
  std::string aggregation = "wf";
  double row_threshold = 0.2;
  std::size_t top_k = 100;
  RerankParams trr_rr;
  std::string trr_metric = "euclidean";
  trr_cmd->add_option("--emb", emb, "Embedding file")->required();
  trr_cmd->add_option("--meta", meta, "Metadata file")->required();
  trr_cmd->add_option("--aggregation", aggregation, "af|wf|none");
  trr_cmd->add_option("--row-threshold", row_threshold,
                      "Row-selection threshold for weighted features");
  trr_cmd->add_option("--k1", trr_rr.k1, "Reciprocal neighborhood size");
  trr_cmd->add_option("--k2", trr_rr.k2, "Local query expansion size");
  trr_cmd->add_option("--lambda", trr_rr.lambda,
                      "Original-distance mixing weight");
  trr_cmd->add_option("--metric", trr_metric, "Distance metric");
  trr_cmd->add_option("--top-k", top_k, "Ranked list length");
  trr_cmd->add_flag("--no-normalize", no_normalize,
                    "Skip L2 normalization of the features");
  trr_cmd->add_option("--out", out_path, "Output rank file")->required();

  // -------------------------------------------------- mine
  auto* mine_cmd = app.add_subcommand("mine", "Identity-mining pseudo labels");
  MiningParams mp;
  std::string mine_metric = "euclidean";
  bool iterate = false;
  mine_cmd->add_option("--emb", emb, "Embedding file")->required();
  mine_cmd->add_option("--meta", meta, "Metadata file")->required();
  mine_cmd->add_option("--dn", mp.negative_threshold, "Negative-pair threshold");
  mine_cmd->add_option("--dp", mp.positive_threshold, "Positive-pair threshold");
  mine_cmd->add_option("--seed", mp.seed, "Initial probe seed");
  mine_cmd->add_option("--restarts", mp.restarts,
                       "Number of seeds; the run with most centers wins");
  mine_cmd->add_flag("--iterate", iterate,
                     "Labeled samples become anchors (off by default)");
  mine_cmd->add_option("--metric", mine_metric, "Distance metric");
  mine_cmd->add_flag("--no-normalize", no_normalize,
                     "Skip L2 normalization of the features");
  mine_cmd->add_option("--out", out_path, "Output label file")->required();

  // -------------------------------------------------- kmeans
  auto* kmeans_cmd =
      app.add_subcommand("kmeans", "Seeded Lloyd clustering baseline");
  std::size_t kmeans_k = 333;
  std::uint64_t kmeans_seed = 0;
  int kmeans_iters = 100;
  std::string kmeans_split = "all";
  kmeans_cmd->add_option("--emb", emb, "Embedding file")->required();
  kmeans_cmd->add_option("--meta", meta, "Metadata file")->required();
  kmeans_cmd->add_option("--k", kmeans_k, "Cluster count")->required();
  kmeans_cmd->add_option("--seed", kmeans_seed, "Initialization seed");
  kmeans_cmd->add_option("--max-iter", kmeans_iters, "Iteration cap");
  kmeans_cmd->add_option("--split", kmeans_split,
                         "Rows to cluster: all|query|gallery|train");
  kmeans_cmd->add_flag("--no-normalize", no_normalize,
                       "Skip L2 normalization of the features");
  kmeans_cmd->add_option("--out", out_path, "Output label file")->required();

  // -------------------------------------------------- eval
  auto* eval_cmd = app.add_subcommand("eval", "Retrieval or label evaluation");
  std::string truth_path, result_path, labels_path;
  std::string metric_spec = "map@100,cmc";
  bool exclude_same_camera = false;
  eval_cmd->add_option("--truth", truth_path, "Metadata file with vehicle ids")
      ->required();
  eval_cmd->add_option("--result", result_path, "Rank file to score");
  eval_cmd->add_option("--labels", labels_path, "Pseudo-label file to score");
  eval_cmd->add_option("--metric", metric_spec, "Comma list, e.g. map@100,cmc");
  eval_cmd->add_flag("--exclude-same-camera", exclude_same_camera,
                     "Drop same-camera gallery items from relevance");
  eval_cmd->add_option("--out", out_path, "Report JSON path");

  // -------------------------------------------------- submit
  auto* submit_cmd =
      app.add_subcommand("submit", "Write a padded submission file");
  std::string submit_result, submit_truth;
  std::size_t pad_to = 100;
  bool zero_based = false;
  submit_cmd->add_option("--result", submit_result, "Rank file")->required();
  submit_cmd->add_option("--truth", submit_truth,
                         "Metadata file (for the gallery size)")
      ->required();
  submit_cmd->add_option("--pad-to", pad_to, "Entries per line");
  submit_cmd->add_flag("--zero-based", zero_based, "Zero-based indices");
  submit_cmd->add_option("--out", out_path, "Submission path")->required();

  // -------------------------------------------------- pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run a configured stage list");
  std::string config_path, out_dir = "run";
  std::uint64_t pipe_seed = 0;
  pipe_cmd->add_option("--config", config_path, "Pipeline config JSON")
      ->required();
  pipe_cmd->add_option("--out-dir", out_dir, "Artifact directory");
  auto* pipe_seed_opt =
      pipe_cmd->add_option("--seed", pipe_seed, "Overrides the config seed");

  CLI11_PARSE(app, argc, argv);
  set_threads(threads);

  try {
    if (*synth_cmd) {
      SynthScenario sc;
      if (!preset_name.empty()) sc = preset(preset_name);
      if (n_ids) sc.n_ids = *n_ids;
      if (dim) sc.dim = *dim;
      if (sigma) sc.noise_sigma = *sigma;
      if (delta) sc.center_min_dist = *delta;
      if (rho) sc.corrupt_fraction = *rho;
      if (sigma_c) sc.corrupt_sigma = *sigma_c;
      if (synth_seed->count() > 0) sc.seed = seed;
      const EmbeddingSet set = generate(sc);
      save_embeddings(set, out_path, out_meta);
      std::cout << "wrote " << set.size() << " rows of dimension " << set.dim
                << " to " << out_path << "\n";
      return 0;
    }

    if (*distmat_cmd) {
      EmbeddingSet all = load_embeddings(emb, meta);
      if (!no_normalize) l2_normalize_in_place(all);
      const EmbeddingSet a = slice_by_name(all, rows_split);
      const EmbeddingSet b = slice_by_name(all, cols_split);
      const DistanceMatrix dm =
          distance_matrix(a, b, metric_from_string(metric_name));
      save_distmat(dm, out_path);
      std::cout << "wrote " << dm.rows << "x" << dm.cols << " matrix to "
                << out_path << ".emb1\n";
      return 0;
    }

    if (*rerank_cmd) {
      const DistanceMatrix qg = load_distmat(in_prefix);
      const DistanceMatrix qq = load_distmat(qq_prefix);
      const DistanceMatrix gg = load_distmat(gg_prefix);
      save_distmat(rerank(qg, qq, gg, rr), out_path);
      std::cout << "wrote re-ranked matrix to " << out_path << ".emb1\n";
      return 0;
    }

    if (*trr_cmd) {
      auto sets = load_query_gallery(emb, meta, !no_normalize);
      RankedResult result;
      if (aggregation == "none") {
        result = rr_only_pipeline(sets.query, sets.gallery, trr_rr,
                                  metric_from_string(trr_metric), top_k);
      } else {
        TrrOptions opts;
        opts.aggregation = aggregation == "af"
                               ? TrackFeatureSet::Aggregation::Average
                               : TrackFeatureSet::Aggregation::Weighted;
        if (aggregation != "af" && aggregation != "wf") {
          throw ParamError("unknown aggregation \"" + aggregation + "\"");
        }
        opts.row_threshold = row_threshold;
        opts.rr = trr_rr;
        opts.metric = metric_from_string(trr_metric);
        opts.top_k = top_k;
        const TrackletIndex index = TrackletIndex::from_metadata(sets.gallery);
        result = trr_pipeline(sets.query, sets.gallery, index, opts);
      }
      save_rank_file(result, out_path);
      std::cout << "wrote ranking to " << out_path << "\n";
      return 0;
    }

    if (*mine_cmd) {
      auto sets = load_query_gallery(emb, meta, !no_normalize);
      mp.iterate_stage2 = iterate;
      mp.metric = metric_from_string(mine_metric);
      const PseudoLabelSet labels = identity_mine(sets.query, sets.gallery, mp);
      save_labels(labels, sets.combined_ids, out_path);
      std::cout << "mined " << labels.centers.size() << " centers, labeled "
                << labels.assignments.size() << " samples\n";
      return 0;
    }

    if (*kmeans_cmd) {
      EmbeddingSet all = load_embeddings(emb, meta);
      if (!no_normalize) l2_normalize_in_place(all);
      const EmbeddingSet rows = slice_by_name(all, kmeans_split);
      const KmeansResult km =
          kmeans_baseline(rows, kmeans_k, kmeans_seed, kmeans_iters);
      PseudoLabelSet as_labels;
      as_labels.params.seed = kmeans_seed;
      for (std::size_t i = 0; i < km.assignment.size(); ++i) {
        as_labels.assignments.emplace_back(static_cast<std::uint32_t>(i),
                                           km.assignment[i]);
      }
      save_labels(as_labels, rows.ids, out_path);
      std::cout << "k-means finished after " << km.iterations
                << " iterations, inertia " << km.inertia << "\n";
      return 0;
    }

    if (*eval_cmd) {
      const auto records = load_metadata(truth_path);
      nlohmann::json report;

      if (!result_path.empty()) {
        const GroundTruth gt = GroundTruth::from_metadata(records);
        RankedResult result;
        for (const auto& rec : records) {
          if (rec.split == Split::Query) result.query_ids.push_back(rec.id);
          if (rec.split == Split::Gallery) result.gallery_ids.push_back(rec.id);
        }
        result.ranks = load_rank_file(result_path, result.gallery_ids.size());
        if (result.ranks.size() != result.query_ids.size()) {
          throw IntegrityError(
              "rank file has " + std::to_string(result.ranks.size()) +
              " lines for " + std::to_string(result.query_ids.size()) +
              " queries");
        }

        EvalOptions opts;
        opts.exclude_same_camera = exclude_same_camera;
        const auto at = metric_spec.find("map@");
        if (at != std::string::npos) {
          opts.k = std::stoul(metric_spec.substr(at + 4));
        }
        const EvalReport r = evaluate(result, gt, opts);
        for (const auto& q : r.skipped_queries) {
          std::cerr << "warning: query " << q
                    << " has no relevant gallery items; skipped\n";
        }
        report["map_at_k"] = r.map_at_k;
        report["k"] = opts.k;
        report["evaluated_queries"] = r.evaluated_queries;
        report["skipped_queries"] = r.skipped_queries;
        if (metric_spec.find("cmc") != std::string::npos) {
          for (const auto& [rank, rate] : r.cmc) {
            report["cmc"][std::to_string(rank)] = rate;
          }
        }
      }

      if (!labels_path.empty()) {
        std::vector<std::string> ids;
        std::vector<std::string> vids;
        for (int pass = 0; pass < 2; ++pass) {
          for (const auto& rec : records) {
            const bool take = pass == 0 ? rec.split == Split::Query
                                        : rec.split == Split::Gallery;
            if (take) {
              ids.push_back(rec.id);
              vids.push_back(rec.vehicle_id);
            }
          }
        }
        std::unordered_map<std::string, std::size_t> by_id;
        for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = i;

        std::vector<std::pair<std::uint32_t, std::uint32_t>> assignments;
        for (const auto& rec : load_labels(labels_path)) {
          auto it = by_id.find(rec.id);
          if (it == by_id.end()) {
            throw IntegrityError("labeled id " + rec.id + " not in metadata");
          }
          assignments.emplace_back(static_cast<std::uint32_t>(it->second),
                                   rec.pseudo_id);
        }
        report["label_accuracy"] = pseudo_label_accuracy(assignments, vids);
        report["labeled_samples"] = assignments.size();
      }

      if (result_path.empty() && labels_path.empty()) {
        throw ParamError("eval needs --result and/or --labels");
      }

      const std::string text = report.dump(2) + "\n";
      if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        out << text;
      }
      std::cout << text;
      return 0;
    }

    if (*submit_cmd) {
      const auto records = load_metadata(submit_truth);
      RankedResult result;
      for (const auto& rec : records) {
        if (rec.split == Split::Query) result.query_ids.push_back(rec.id);
        if (rec.split == Split::Gallery) result.gallery_ids.push_back(rec.id);
      }
      result.ranks = load_rank_file(submit_result, result.gallery_ids.size());
      if (result.ranks.size() != result.query_ids.size()) {
        throw IntegrityError("rank file does not match the query count");
      }
      write_submission(result, out_path, !zero_based, pad_to);
      std::cout << "wrote submission to " << out_path << "\n";
      return 0;
    }

    if (*pipe_cmd) {
      PipelineConfig cfg = PipelineConfig::from_file(config_path);
      if (pipe_seed_opt->count() > 0) cfg.set_seed(pipe_seed);
      const RunManifest manifest = run_pipeline(cfg, out_dir);
      if (!manifest.ok) {
        std::cerr << "pipeline failed at stage: " << manifest.failed_stage << "\n";
        for (const auto& s : manifest.stages) {
          if (!s.error.empty()) {
            std::cerr << "  " << s.name << ": " << s.error << "\n";
          }
        }
        return 1;
      }
      std::cout << "pipeline complete; manifest at " << out_dir
                << "/manifest.json\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
