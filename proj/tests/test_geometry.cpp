// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Geometric kernels against hand-worked cases and the brute-force oracles,
// plus the cloud file formats.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "relc/cloud_io.hpp"
#include "relc/error.hpp"
#include "relc/geometry.hpp"
#include "relc/rng.hpp"

using relc::PointCloud;
using relc::Rng;
using relc::Vec3;

namespace {

PointCloud random_cloud(int n, Rng& rng, double extent = 1.0) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.add({relc::uniform(rng, -extent, extent), relc::uniform(rng, -extent, extent),
           relc::uniform(rng, -extent, extent)});
  return c;
}

double min_pairwise_distance(const PointCloud& c, const std::vector<int>& ids) {
  double best = 1e300;
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = i + 1; j < ids.size(); ++j)
      best = std::min(best, relc::distance(c[ids[i]], c[ids[j]]));
  return best;
}

}  // namespace

TEST_CASE("knn self neighbor identity") {
  PointCloud c;
  c.add({0, 0, 0});
  auto nn = relc::knn(c, c, 1);
  CHECK(nn.id(0, 0) == 0);
  CHECK(nn.distance(0, 0) == 0.0);
}

TEST_CASE("knn hand example") {
  PointCloud q, ref;
  q.add({0, 0, 0});
  ref.add({1, 0, 0});
  ref.add({0, 2, 0});
  ref.add({0, 0, 3});
  auto nn = relc::knn(q, ref, 2);
  CHECK(nn.id(0, 0) == 0);
  CHECK(nn.id(0, 1) == 1);
  CHECK(nn.distance(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nn.distance(0, 1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("knn ties break toward the smaller reference index") {
  PointCloud q, ref;
  q.add({0, 0, 0});
  ref.add({1, 0, 0});
  ref.add({-1, 0, 0});  // same distance as index 0
  ref.add({0.5, 0, 0});
  auto nn = relc::knn(q, ref, 3);
  CHECK(nn.id(0, 0) == 2);
  CHECK(nn.id(0, 1) == 0);  // 0 beats 1 at equal distance
  CHECK(nn.id(0, 2) == 1);
}

TEST_CASE("knn matches the full-sort oracle on 100 random clouds") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + relc::uniform_index(rng, 250);
    const int k = 1 + relc::uniform_index(rng, std::min(32, n));
    PointCloud ref = random_cloud(n, rng);
    PointCloud q = random_cloud(1 + relc::uniform_index(rng, 16), rng);
    auto nn = relc::knn(q, ref, k);
    for (int i = 0; i < q.count(); ++i) {
      auto want = oracle::knn_row(q, i, ref, k);
      for (int j = 0; j < k; ++j) {
        REQUIRE(nn.id(i, j) == want[static_cast<size_t>(j)].second);
        REQUIRE(nn.distance(i, j) ==
                doctest::Approx(std::sqrt(want[static_cast<size_t>(j)].first)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("knn rejects bad arguments") {
  PointCloud c;
  c.add({0, 0, 0});
  CHECK_THROWS_AS(relc::knn(c, c, 2), std::invalid_argument);
  PointCloud bad;
  bad.add({std::numeric_limits<double>::infinity(), 0, 0});
  CHECK_THROWS_AS(relc::knn(bad, c, 1), relc::DataError);
  PointCloud empty;
  CHECK_THROWS_AS(relc::knn(empty, c, 1), std::invalid_argument);
}

TEST_CASE("fps with m = count is a permutation") {
  Rng rng(3);
  PointCloud c = random_cloud(17, rng);
  auto ids = relc::farthest_point_sample(c, 17, 99);
  std::set<int> seen(ids.begin(), ids.end());
  CHECK(seen.size() == 17);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 16);
}

TEST_CASE("fps hand example with a forced start") {
  PointCloud c;
  c.add({0, 0, 0});
  c.add({10, 0, 0});
  c.add({5, 0, 0});
  auto ids = relc::farthest_point_sample_from(c, 2, 0);
  REQUIRE(ids.size() == 2);
  CHECK(ids[0] == 0);
  CHECK(ids[1] == 1);  // 10 away beats 5 away
}

TEST_CASE("fps is deterministic and rejects m > count") {
  Rng rng(4);
  PointCloud c = random_cloud(40, rng);
  auto a = relc::farthest_point_sample(c, 12, 7);
  auto b = relc::farthest_point_sample(c, 12, 7);
  CHECK(a == b);
  CHECK_THROWS_AS(relc::farthest_point_sample(c, 41, 7), std::invalid_argument);
}

TEST_CASE("fps spreads points at least as well as uniform sampling") {
  Rng rng(5);
  int wins = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    PointCloud c = random_cloud(60, rng);
    const int m = 8;
    auto fps = relc::farthest_point_sample(c, m, relc::mix_seed(5, t));
    // Uniform comparison sample: first m indices of a seeded shuffle.
    std::vector<int> all(60);
    for (int i = 0; i < 60; ++i) all[static_cast<size_t>(i)] = i;
    Rng shuffle_rng(relc::mix_seed(6, t));
    for (int i = 59; i > 0; --i)
      std::swap(all[static_cast<size_t>(i)],
                all[static_cast<size_t>(relc::uniform_index(shuffle_rng, i + 1))]);
    all.resize(m);
    if (min_pairwise_distance(c, fps) >= min_pairwise_distance(c, all)) ++wins;
  }
  CHECK(wins >= trials * 95 / 100);
}

TEST_CASE("normalize_unit_sphere handles degenerate and symmetric clouds") {
  PointCloud single;
  single.add({5, 5, 5});
  auto ns = relc::normalize_unit_sphere(single);
  CHECK(ns.cloud[0].norm() == 0.0);
  CHECK(ns.centroid.x == 5.0);
  CHECK(ns.scale == 1.0);

  PointCloud pair;
  pair.add({1, 0, 0});
  pair.add({-1, 0, 0});
  auto np = relc::normalize_unit_sphere(pair);
  CHECK(np.cloud[0].x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(np.cloud[1].x == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(np.centroid.norm() == 0.0);
  CHECK(np.scale == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("normalize round trip is exact to 1e-12") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    PointCloud c = random_cloud(30, rng, 12.0);
    auto n = relc::normalize_unit_sphere(c);
    CHECK(n.cloud.max_norm() <= 1.0 + 1e-12);
    PointCloud back = relc::denormalize(n.cloud, n.centroid, n.scale);
    for (int i = 0; i < c.count(); ++i) {
      CHECK(back[i].x == doctest::Approx(c[i].x).epsilon(1e-12));
      CHECK(back[i].y == doctest::Approx(c[i].y).epsilon(1e-12));
      CHECK(back[i].z == doctest::Approx(c[i].z).epsilon(1e-12));
    }
  }
}

TEST_CASE("crop_occlusion keeps the near half space") {
  PointCloud line;
  line.add({0.1, 0, 0});
  line.add({0.4, 0, 0});
  line.add({0.2, 0, 0});
  line.add({0.3, 0, 0});

  PointCloud all = relc::crop_occlusion(line, {1, 0, 0}, 1.0, 0);
  CHECK(all.count() == 4);

  PointCloud half = relc::crop_occlusion(line, {1, 0, 0}, 0.5, 0);
  REQUIRE(half.count() == 2);
  // The two smallest projections onto +x are 0.1 and 0.2.
  std::vector<double> xs = {half[0].x, half[1].x};
  std::sort(xs.begin(), xs.end());
  CHECK(xs[0] == doctest::Approx(0.1));
  CHECK(xs[1] == doctest::Approx(0.2));

  CHECK_THROWS_AS(relc::crop_occlusion(line, {0, 0, 0}, 0.5, 0), std::invalid_argument);
}

TEST_CASE("crop_occlusion count follows the ceiling rule") {
  Rng rng(7);
  PointCloud c = random_cloud(37, rng);
  for (double f : {0.1, 0.25, 0.5, 0.77, 1.0}) {
    PointCloud out = relc::crop_occlusion(c, {0, 0, 1}, f, 1);
    CHECK(out.count() == static_cast<int>(std::ceil(f * 37)));
  }
}

TEST_CASE("xyz and ply files round trip") {
  Rng rng(8);
  PointCloud c = random_cloud(25, rng, 3.0);
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "relc_geom_test";
  fs::create_directories(dir);

  const std::string xyz = (dir / "c.xyz").string();
  relc::write_xyz(c, xyz);
  PointCloud cx = relc::read_cloud(xyz);
  REQUIRE(cx.count() == 25);
  for (int i = 0; i < 25; ++i) CHECK(relc::distance(cx[i], c[i]) < 1e-9);

  const std::string ply = (dir / "c.ply").string();
  relc::write_ply(c, ply);
  PointCloud cp = relc::read_cloud(ply);
  REQUIRE(cp.count() == 25);
  // PLY stores 32-bit floats; expect single precision round-off only.
  for (int i = 0; i < 25; ++i) CHECK(relc::distance(cp[i], c[i]) < 1e-6);

  fs::remove_all(dir);
}

TEST_CASE("cloud readers reject missing files and bad data") {
  CHECK_THROWS_AS(relc::read_cloud("/nonexistent/path/x.xyz"), relc::IoError);
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "relc_geom_bad";
  fs::create_directories(dir);
  const std::string bad = (dir / "bad.xyz").string();
  {
    std::ofstream f(bad);
    f << "0 0 0\nnan 1 2\n";
  }
  CHECK_THROWS_AS(relc::read_xyz(bad), relc::DataError);
  fs::remove_all(dir);
}
