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

#include "helpers.hpp"
#include "reference.hpp"
#include "vreid/core.hpp"

using namespace vreid;
using testutil::make_set;
using testutil::random_set;

TEST_CASE("l2_normalize scales a 3-4-5 row to (0.6, 0.8)") {
  auto set = make_set({{3.0, 4.0}});
  auto out = l2_normalize(set);
  CHECK(out.row(0)[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(out.row(0)[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("l2_normalize keeps a unit vector unchanged") {
  auto set = make_set({{1.0, 0.0, 0.0}});
  auto out = l2_normalize(set);
  CHECK(out.row(0)[0] == 1.0);
  CHECK(out.row(0)[1] == 0.0);
  CHECK(out.row(0)[2] == 0.0);
}

TEST_CASE("l2_normalize rejects a zero row and names it") {
  auto set = make_set({{1.0, 1.0}, {0.0, 0.0}});
  CHECK_THROWS_AS(l2_normalize(set), InputError);
  try {
    l2_normalize(set);
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("l2_normalize: all norms are 1 within 1e-9 on a random 50x16 set") {
  auto set = l2_normalize(random_set(50, 16, 7));
  for (std::size_t i = 0; i < set.size(); ++i) {
    double sq = 0.0;
    for (std::size_t d = 0; d < set.dim; ++d) sq += set.row(i)[d] * set.row(i)[d];
    CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-9);
  }
}

TEST_CASE("l2_normalize is idempotent to 1e-9") {
  auto once = l2_normalize(random_set(20, 8, 9));
  auto twice = l2_normalize(once);
  for (std::size_t i = 0; i < once.features.size(); ++i) {
    CHECK(std::abs(once.features[i] - twice.features[i]) < 1e-9);
  }
}

TEST_CASE("distance of a vector to itself is zero") {
  auto set = make_set({{0.3, -0.7, 1.1}});
  auto dm = distance_matrix(set, set, Metric::Euclidean);
  CHECK(dm.at(0, 0) == 0.0);
}

TEST_CASE("orthogonal unit vectors are sqrt(2) apart") {
  auto a = make_set({{1.0, 0.0}});
  auto b = make_set({{0.0, 1.0}});
  auto dm = distance_matrix(a, b, Metric::Euclidean);
  CHECK(dm.at(0, 0) == doctest::Approx(1.41421356).epsilon(1e-8));
}

TEST_CASE("distance_matrix rejects mismatched dimensions") {
  auto a = make_set({{1.0, 0.0}});
  auto b = make_set({{1.0, 0.0, 0.0}});
  CHECK_THROWS_AS(distance_matrix(a, b, Metric::Euclidean), ShapeError);
}

TEST_CASE("distance_matrix matches the naive scalar oracle within 1e-9") {
  auto a = random_set(20, 8, 100);
  auto b = random_set(30, 8, 101);
  for (Metric m : {Metric::Euclidean, Metric::SquaredEuclidean,
                   Metric::CosineDistance}) {
    auto dm = distance_matrix(a, b, m);
    std::vector<double> expect(a.size() * b.size());
    ref::distance_matrix_naive(a.features.data(), a.size(), b.features.data(),
                               b.size(), a.dim, m, expect.data());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(std::abs(dm.values[i] - expect[i]) < 1e-9);
    }
  }
}

TEST_CASE("self distance matrix is symmetric with zero diagonal") {
  auto a = random_set(25, 6, 42);
  auto dm = distance_matrix(a, a, Metric::Euclidean);
  for (std::size_t i = 0; i < dm.rows; ++i) {
    CHECK(std::abs(dm.at(i, i)) < 1e-6);
    for (std::size_t j = 0; j < dm.cols; ++j) {
      CHECK(std::abs(dm.at(i, j) - dm.at(j, i)) < 1e-6);
    }
  }
}

TEST_CASE("euclidean^2 equals 2 * cosine distance on normalized rows") {
  auto a = l2_normalize(random_set(15, 10, 5));
  auto b = l2_normalize(random_set(12, 10, 6));
  auto eu = distance_matrix(a, b, Metric::Euclidean);
  auto co = distance_matrix(a, b, Metric::CosineDistance);
  for (std::size_t i = 0; i < eu.values.size(); ++i) {
    CHECK(std::abs(eu.values[i] * eu.values[i] - 2.0 * co.values[i]) < 1e-6);
  }
}

TEST_CASE("cosine distance rejects a zero row") {
  auto a = make_set({{0.0, 0.0}});
  auto b = make_set({{1.0, 0.0}});
  CHECK_THROWS_AS(distance_matrix(a, b, Metric::CosineDistance), InputError);
}

TEST_CASE("top_k picks the two smallest entries in order") {
  DistanceMatrix dm;
  dm.rows = 1;
  dm.cols = 3;
  dm.values = {0.5, 0.1, 0.9};
  auto out = top_k_neighbors(dm, 2);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == std::vector<std::uint32_t>{1, 0});
}

TEST_CASE("top_k breaks ties toward the lower index") {
  DistanceMatrix dm;
  dm.rows = 1;
  dm.cols = 2;
  dm.values = {0.2, 0.2};
  auto out = top_k_neighbors(dm, 1);
  CHECK(out[0] == std::vector<std::uint32_t>{0});
}

TEST_CASE("top_k rejects k beyond the column count") {
  DistanceMatrix dm;
  dm.rows = 1;
  dm.cols = 2;
  dm.values = {0.2, 0.3};
  CHECK_THROWS_AS(top_k_neighbors(dm, 3), ParamError);
  CHECK_THROWS_AS(top_k_neighbors(dm, 0), ParamError);
}

TEST_CASE("top_k matches the full argsort oracle on a 100x500 instance") {
  auto a = random_set(100, 4, 200);
  auto b = random_set(500, 4, 201);
  auto dm = distance_matrix(a, b, Metric::Euclidean);
  auto got = top_k_neighbors(dm, 10);
  auto expect = ref::top_k_full_sort(dm, 10);
  CHECK(got == expect);
}

TEST_CASE("top_k is deterministic across repeated calls") {
  auto a = random_set(40, 4, 300);
  auto dm = distance_matrix(a, a, Metric::Euclidean);
  CHECK(top_k_neighbors(dm, 7) == top_k_neighbors(dm, 7));
}
