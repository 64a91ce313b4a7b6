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
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "reference.hpp"
#include "vreid/core.hpp"
#include "vreid/eval.hpp"

using namespace vreid;
using testutil::make_set;
using testutil::random_set;

namespace {

GroundTruth truth_from(const std::vector<std::string>& query_vids,
                       const std::vector<std::string>& gallery_vids) {
  GroundTruth gt;
  gt.query_vehicle = query_vids;
  gt.query_camera.assign(query_vids.size(), "");
  gt.gallery_vehicle = gallery_vids;
  gt.gallery_camera.assign(gallery_vids.size(), "");
  return gt;
}

RankedResult result_of(std::vector<std::vector<std::uint32_t>> ranks,
                       std::size_t n_gallery) {
  RankedResult r;
  for (std::size_t q = 0; q < ranks.size(); ++q) {
    r.query_ids.push_back("q" + std::to_string(q));
  }
  for (std::size_t g = 0; g < n_gallery; ++g) {
    r.gallery_ids.push_back("g" + std::to_string(g));
  }
  r.ranks = std::move(ranks);
  return r;
}

struct RandomInstance {
  RankedResult result;
  GroundTruth truth;
  std::vector<std::vector<char>> relevant;  // oracle-side relevance masks
};

RandomInstance random_instance(std::size_t nq, std::size_t ng,
                               std::size_t n_vids, std::size_t k,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> qv(nq), gv(ng);
  for (auto& v : qv) v = "v" + std::to_string(rng() % n_vids);
  for (auto& v : gv) v = "v" + std::to_string(rng() % n_vids);

  RandomInstance inst;
  inst.truth = truth_from(qv, gv);

  // Ranked lists from random scores.
  DistanceMatrix dm;
  dm.rows = nq;
  dm.cols = ng;
  dm.values.resize(nq * ng);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (auto& v : dm.values) v = dist(rng);

  std::vector<std::vector<std::uint32_t>> ranks(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    ranks[q] = top_k_of_row(dm.row(q), ng, std::min(k, ng));
  }
  inst.result = result_of(std::move(ranks), ng);

  inst.relevant.assign(nq, std::vector<char>(ng, 0));
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t g = 0; g < ng; ++g) {
      inst.relevant[q][g] = qv[q] == gv[g] ? 1 : 0;
    }
  }
  return inst;
}

}  // namespace

TEST_CASE("perfect ranking scores mAP 1.0 and CMC 1.0 everywhere") {
  auto truth = truth_from({"a", "b"}, {"a", "b", "a"});
  auto result = result_of({{0, 2, 1}, {1, 0, 2}}, 3);
  auto report = evaluate(result, truth);
  CHECK(report.map_at_k == doctest::Approx(1.0));
  for (const auto& [rank, rate] : report.cmc) CHECK(rate == doctest::Approx(1.0));
}

TEST_CASE("one relevant item at rank 2 gives AP 0.5") {
  auto truth = truth_from({"a"}, {"b", "a", "b"});
  auto result = result_of({{0, 1, 2}}, 3);
  CHECK(map_at_k(result, truth) == doctest::Approx(0.5));
}

TEST_CASE("mAP and CMC match the literal oracles on a random instance") {
  auto inst = random_instance(50, 200, 20, 100, 31337);
  EvalOptions opts;
  auto report = evaluate(inst.result, inst.truth, opts);
  CHECK(std::abs(report.map_at_k -
                 ref::map_literal(inst.result, inst.relevant, opts.k)) < 1e-9);
  auto oracle_cmc =
      ref::cmc_literal(inst.result, inst.relevant, opts.cmc_ranks, opts.k);
  for (const auto& [rank, rate] : report.cmc) {
    CHECK(std::abs(rate - oracle_cmc.at(rank)) < 1e-9);
  }
}

TEST_CASE("queries with no relevant gallery items are skipped, not zeroed") {
  auto truth = truth_from({"a", "zzz"}, {"a", "b"});
  auto result = result_of({{0, 1}, {0, 1}}, 2);
  auto report = evaluate(result, truth);
  CHECK(report.evaluated_queries == 1);
  REQUIRE(report.skipped_queries.size() == 1);
  CHECK(report.skipped_queries[0] == "q1");
  CHECK(report.map_at_k == doctest::Approx(1.0));
}

TEST_CASE("out-of-range gallery indices are an integrity error") {
  auto truth = truth_from({"a"}, {"a", "b"});
  auto result = result_of({{0, 5}}, 2);
  CHECK_THROWS_AS(evaluate(result, truth), IntegrityError);
}

TEST_CASE("first hit at position 3 gives rate 0 at rank 1 and 1 at rank 5") {
  auto truth = truth_from({"a"}, {"b", "b", "a", "b", "b"});
  auto result = result_of({{0, 1, 2, 3, 4}}, 5);
  auto rates = cmc(result, truth);
  CHECK(rates.at(1) == doctest::Approx(0.0));
  CHECK(rates.at(5) == doctest::Approx(1.0));
}

TEST_CASE("CMC is monotone in the rank") {
  auto inst = random_instance(40, 150, 12, 100, 999);
  auto rates = cmc(inst.result, inst.truth);
  CHECK(rates.at(1) <= rates.at(5));
  CHECK(rates.at(5) <= rates.at(10));
  CHECK(rates.at(10) <= rates.at(15));
  CHECK(rates.at(15) <= rates.at(20));
}

TEST_CASE("mAP is invariant under consistent relabeling of vehicle ids") {
  auto inst = random_instance(20, 80, 8, 100, 4242);
  const double base = map_at_k(inst.result, inst.truth);
  GroundTruth renamed = inst.truth;
  for (auto& v : renamed.query_vehicle) v = "prefix_" + v;
  for (auto& v : renamed.gallery_vehicle) v = "prefix_" + v;
  CHECK(map_at_k(inst.result, renamed) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("same-camera exclusion removes same-camera matches from relevance") {
  GroundTruth gt;
  gt.query_vehicle = {"a"};
  gt.query_camera = {"c1"};
  gt.gallery_vehicle = {"a", "a"};
  gt.gallery_camera = {"c1", "c2"};
  auto result = result_of({{0, 1}}, 2);

  EvalOptions opts;
  opts.exclude_same_camera = true;
  auto report = evaluate(result, gt, opts);
  // Only the cross-camera copy counts: a single relevant item at rank 2.
  CHECK(report.map_at_k == doctest::Approx(0.5));
}

TEST_CASE("identical pseudo labels up to renaming score accuracy 1.0") {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> assignments;
  std::vector<std::string> truth;
  for (std::uint32_t i = 0; i < 12; ++i) {
    assignments.push_back({i, i % 3});            // pseudo ids 0,1,2
    truth.push_back("v" + std::to_string(2 - i % 3));  // renamed true ids
  }
  CHECK(pseudo_label_accuracy(assignments, truth) == doctest::Approx(1.0));
}

TEST_CASE("one mislabeled sample out of ten scores 0.9") {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> assignments;
  std::vector<std::string> truth;
  for (std::uint32_t i = 0; i < 10; ++i) {
    assignments.push_back({i, i < 5 ? 0u : 1u});
    truth.push_back(i < 5 ? "a" : "b");
  }
  truth[0] = "b";  // one sample contradicts its pseudo id
  CHECK(pseudo_label_accuracy(assignments, truth) == doctest::Approx(0.9));
}

TEST_CASE("hungarian matching equals brute-force enumeration on small tables") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n_pid = 2 + rng() % 5;   // up to 6 pseudo ids
    const std::size_t n_true = 2 + rng() % 5;  // up to 6 true ids
    std::vector<std::pair<std::uint32_t, std::uint32_t>> assignments;
    std::vector<std::string> truth;
    const std::size_t n = 30;
    for (std::uint32_t i = 0; i < n; ++i) {
      assignments.push_back({i, static_cast<std::uint32_t>(rng() % n_pid)});
      truth.push_back("v" + std::to_string(rng() % n_true));
    }
    CHECK(pseudo_label_accuracy(assignments, truth) ==
          doctest::Approx(ref::accuracy_bruteforce(assignments, truth))
              .epsilon(1e-12));
  }
}

TEST_CASE("a labeled sample without ground truth is an input error") {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> assignments = {{0, 0},
                                                                      {1, 0}};
  std::vector<std::string> truth = {"a", ""};
  CHECK_THROWS_AS(pseudo_label_accuracy(assignments, truth), InputError);
}

namespace {

EmbeddingSet labeled_batch(const std::vector<std::vector<double>>& rows,
                           const std::vector<std::string>& vids) {
  auto set = make_set(rows);
  set.vehicle_id = vids;
  return set;
}

}  // namespace

TEST_CASE("triplet term is log 2 when positives collapse and the negative gap is m") {
  // f_a == f_p, |f_a - f_n|^2 == m: the exponent cancels to zero.
  const double m = 0.25;
  auto batch = labeled_batch(
      {{0.0, 0.0}, {0.0, 0.0}, {0.5, 0.0}, {0.5, 0.0}},
      {"a", "a", "b", "b"});
  auto res = triplet_loss_batch_hard(batch, m);
  CHECK(res.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(res.loss == doctest::Approx(0.693147).epsilon(1e-5));
}

TEST_CASE("a far negative drives the loss toward zero from above") {
  auto batch = labeled_batch(
      {{0.0, 0.0}, {0.01, 0.0}, {6.0, 0.0}, {6.01, 0.0}},
      {"a", "a", "b", "b"});
  auto res = triplet_loss_batch_hard(batch, 0.0);
  CHECK(res.loss > 0.0);
  CHECK(res.loss < 1e-6);
}

TEST_CASE("triplet loss matches the transliteration oracle on seeded batches") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto batch = random_set(12, 8, 7000 + seed);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      batch.vehicle_id[i] = "v" + std::to_string(i % 4);  // 4 ids x 3 samples
    }
    auto res = triplet_loss_batch_hard(batch, 0.1);
    CHECK(std::abs(res.loss - ref::triplet_loss_literal(batch, 0.1)) < 1e-9);
  }
}

TEST_CASE("analytic triplet gradient matches central finite differences") {
  auto batch = random_set(12, 8, 8123);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch.vehicle_id[i] = "v" + std::to_string(i % 4);
  }
  const double margin = 0.05;
  auto res = triplet_loss_batch_hard(batch, margin);

  const double h = 1e-6;
  double num_sq = 0.0, den_sq = 0.0;
  for (std::size_t p = 0; p < batch.features.size(); ++p) {
    EmbeddingSet plus = batch, minus = batch;
    plus.features[p] += h;
    minus.features[p] -= h;
    const double fd = (triplet_loss_batch_hard(plus, margin).loss -
                       triplet_loss_batch_hard(minus, margin).loss) /
                      (2.0 * h);
    const double diff = fd - res.gradient[p];
    num_sq += diff * diff;
    den_sq += fd * fd;
  }
  CHECK(std::sqrt(num_sq) <= 1e-4 * std::sqrt(den_sq));
}

TEST_CASE("bad batch composition is rejected") {
  auto single_id = labeled_batch({{0.0}, {1.0}}, {"a", "a"});
  CHECK_THROWS_AS(triplet_loss_batch_hard(single_id, 0.0), InputError);

  auto lone_sample = labeled_batch({{0.0}, {1.0}, {2.0}}, {"a", "a", "b"});
  CHECK_THROWS_AS(triplet_loss_batch_hard(lone_sample, 0.0), InputError);
}
