#include <doctest.h>

#include "gridsynth/grid.hpp"
#include "test_util.hpp"

using namespace gridsynth;
using namespace testutil;

TEST_CASE("subimage of a single-cell grid is the whole raster") {
  GridImage img = all_distinct_image(1, 2);
  const SubImage s = subimage(img, {1, 1});
  CHECK(s.side == 2);
  CHECK(s.pixels == img.pixels());
  CHECK(s.origin == CellIndex{1, 1});
}

TEST_CASE("uniform image yields byte-identical sub-images") {
  GridImage img = uniform_image(4, 3, {10, 20, 30});
  const SubImage a = subimage(img, {1, 1});
  const SubImage b = subimage(img, {4, 2});
  CHECK(a.pixels == b.pixels);
}

TEST_CASE("subimage picks the block at the documented pixel offset") {
  // N=9, M=16: cell (3,4) starts at pixel row 32, column 48.
  GridImage img(9, 16);
  auto& px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 31);
  const SubImage s = subimage(img, {3, 4});
  for (int dy = 0; dy < 16; ++dy)
    for (int dx = 0; dx < 16; ++dx)
      for (int c = 0; c < 3; ++c) {
        const std::uint8_t expect = img.px(48 + dx, 32 + dy)[c];
        CHECK(s.pixels[3 * (dy * 16 + dx) + c] == expect);
      }
}

TEST_CASE("subimage rejects out-of-range cells") {
  GridImage img = uniform_image(3, 2, {0, 0, 0});
  CHECK_THROWS_AS(subimage(img, {0, 1}), InputError);
  CHECK_THROWS_AS(subimage(img, {1, 4}), InputError);
}

TEST_CASE("distance of a tile to itself is zero") {
  Rng rng(3);
  const DistanceConfig cfg;
  for (int i = 0; i < 10; ++i) {
    const SubImage t = random_tile(5, rng);
    CHECK(distance(t, t, cfg) == 0.0);
  }
  const SubImage flat = tile_of({66, 66, 66}, 4);
  CHECK(distance(flat, flat, cfg) == 0.0);
}

TEST_CASE("all-black vs all-white with two bins is exactly one") {
  DistanceConfig cfg;
  cfg.hist_bins = 2;
  cfg.w_emd = 1.0;
  cfg.w_struct = 0.0;
  const SubImage black = tile_of({0, 0, 0}, 4);
  const SubImage white = tile_of({255, 255, 255}, 4);
  CHECK(distance(black, white, cfg) == 1.0);
}

TEST_CASE("distance matches a direct reference implementation") {
  Rng rng(17);
  DistanceConfig cfg;
  for (int i = 0; i < 50; ++i) {
    cfg.hist_bins = 2 + static_cast<int>(rng.uniform_int(0, 14));
    cfg.w_emd = rng.uniform01();
    cfg.w_struct = rng.uniform01() + 0.01;
    const SubImage a = random_tile(4, rng);
    const SubImage b = random_tile(4, rng);
    const double got = distance(a, b, cfg);
    const double want = reference_distance(a, b, cfg);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("distance is exactly symmetric and scales with the weights") {
  Rng rng(23);
  DistanceConfig cfg;
  for (int i = 0; i < 30; ++i) {
    const SubImage a = random_tile(6, rng);
    const SubImage b = random_tile(6, rng);
    CHECK(distance(a, b, cfg) == distance(b, a, cfg));

    DistanceConfig doubled = cfg;
    doubled.w_emd *= 2;
    doubled.w_struct *= 2;
    CHECK(distance(a, b, doubled) == 2.0 * distance(a, b, cfg));
  }
}

TEST_CASE("distance validates shapes and config") {
  const SubImage a = tile_of({1, 2, 3}, 3);
  const SubImage b = tile_of({1, 2, 3}, 4);
  CHECK_THROWS_AS(distance(a, b, DistanceConfig{}), InputError);
  DistanceConfig bad;
  bad.hist_bins = 1;
  CHECK_THROWS_AS(distance(a, a, bad), InputError);
  DistanceConfig zero;
  zero.w_emd = 0.0;
  zero.w_struct = 0.0;
  CHECK_THROWS_AS(distance(a, a, zero), InputError);
}

TEST_CASE("flat tiles match iff their means are within one intensity step") {
  DistanceConfig cfg;
  cfg.w_emd = 0.0;
  cfg.w_struct = 1.0;
  const SubImage a = tile_of({100, 100, 100}, 4);
  const SubImage same = tile_of({100, 100, 100}, 4);
  const SubImage other = tile_of({120, 120, 120}, 4);
  CHECK(distance(a, same, cfg) == 0.0);
  CHECK(distance(a, other, cfg) == 1.0);
}

TEST_CASE("similarity tensor of a uniform image is all ones") {
  const GridImage img = uniform_image(3, 2, {7, 7, 7});
  const SimilarityTensor t = build_similarity_tensor(img, 0.1, DistanceConfig{});
  CHECK(t.ones_count() == 81);
}

TEST_CASE("eps zero on pairwise-distinct cells leaves only the diagonal") {
  const GridImage img = all_distinct_image(3, 2);
  const SimilarityTensor t = build_similarity_tensor(img, 0.0, DistanceConfig{});
  CHECK(t.ones_count() == 9);
  for (int t1 = 1; t1 <= 3; ++t1)
    for (int u1 = 1; u1 <= 3; ++u1) CHECK(t.get(t1, u1, t1, u1));
}

TEST_CASE("two identical cells produce exactly one symmetric off-diagonal pair") {
  GridImage img = all_distinct_image(3, 2);
  img.fill_cell({1, 1}, {200, 10, 10});
  img.fill_cell({3, 3}, {200, 10, 10});
  const SimilarityTensor t = build_similarity_tensor(img, 0.01, DistanceConfig{});
  // Verified by exhaustive pair check below.
  int off_diagonal = 0;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      for (int c = 1; c <= 3; ++c)
        for (int d = 1; d <= 3; ++d) {
          if (a == c && b == d) {
            CHECK(t.get(a, b, c, d));
          } else if (t.get(a, b, c, d)) {
            ++off_diagonal;
            const bool expected = (a == 1 && b == 1 && c == 3 && d == 3) ||
                                  (a == 3 && b == 3 && c == 1 && d == 1);
            CHECK(expected);
          }
        }
  CHECK(off_diagonal == 2);
}

TEST_CASE("tensor construction is symmetric, reflexive, and thread-invariant") {
  Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 3));
    const GridImage img = random_palette_image(n, 3, 3, rng);
    const SimilarityTensor one = build_similarity_tensor(img, 0.2, DistanceConfig{}, 1);
    const SimilarityTensor many = build_similarity_tensor(img, 0.2, DistanceConfig{}, 8);
    CHECK(one == many);
    for (int t1 = 1; t1 <= n; ++t1)
      for (int u1 = 1; u1 <= n; ++u1) {
        CHECK(one.get(t1, u1, t1, u1));
        for (int t2 = 1; t2 <= n; ++t2)
          for (int u2 = 1; u2 <= n; ++u2)
            CHECK(one.get(t1, u1, t2, u2) == one.get(t2, u2, t1, u1));
      }
  }
}

TEST_CASE("grid image validates its dimensions") {
  CHECK_THROWS_AS(GridImage(0, 4), InputError);
  CHECK_THROWS_AS(GridImage(2, 2, std::vector<std::uint8_t>(5)), InputError);
}
