#include <doctest.h>

#include "gridsynth/tensor.hpp"
#include "test_util.hpp"

using namespace gridsynth;

TEST_CASE("cell set basics") {
  CellSet s(3);
  CHECK(s.count() == 0);
  s.set(2, 3);
  CHECK(s.test(2, 3));
  CHECK_FALSE(s.test(3, 2));
  CHECK(s.count() == 1);

  const CellSet full = CellSet::full(3);
  CHECK(full.count() == 9);
  CHECK(full.contains(s));
  CHECK_FALSE(s.contains(full));

  std::vector<int> seen;
  full.for_each([&](int c) { seen.push_back(c); });
  CHECK(seen.size() == 9);
  CHECK(std::is_sorted(seen.begin(), seen.end()));
}

TEST_CASE("cell set spanning multiple words") {
  CellSet s(9);  // 81 bits -> 2 words
  CHECK(s.word_count() == 2);
  s.set(9, 9);
  s.set(1, 1);
  CHECK(s.count() == 2);
  CHECK(CellSet::full(9).count() == 81);
}

TEST_CASE("tensor get/set and symmetry of set_pair") {
  SimilarityTensor t(3);
  t.set_pair(t.cell_id(1, 2), t.cell_id(3, 1));
  CHECK(t.get(1, 2, 3, 1));
  CHECK(t.get(3, 1, 1, 2));
  CHECK_FALSE(t.get(1, 1, 1, 1));
  CHECK(t.ones_count() == 2);
}

TEST_CASE("objective counts match entrywise reference") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 2));
    const SimilarityTensor bx = testutil::random_tensor(n, 0.3, rng);
    const SimilarityTensor bp = testutil::random_tensor(n, 0.4, rng);
    const ObjectiveCounts fast = objective_counts(bx, bp);
    const ObjectiveCounts ref = testutil::reference_counts(bx, bp);
    CHECK(fast == ref);
    // Restricting to the full universe must not change anything.
    CHECK(objective_counts(bx, bp, CellSet::full(n)) == ref);
  }
}

TEST_CASE("objective counts over a restricted universe") {
  // Universe of two cells: only the 4 entries among them count.
  SimilarityTensor bx(3), bp(3);
  bx.set_pair(0, 0);
  bx.set_pair(0, 4);
  bp.set_pair(4, 4);
  CellSet universe(3);
  universe.set(0);
  universe.set(4);
  const ObjectiveCounts c = objective_counts(bx, bp, universe);
  // Entries: (0,0) x=1 p=0; (0,4)/(4,0) x=1 p=0; (4,4) x=0 p=1.
  CHECK(c.tp == 0);
  CHECK(c.zeros_agree == 0);
}

TEST_CASE("weighted sign is exact where doubles round") {
  // 0.5 is a binary value: 1 - 0.5*2 is exactly zero.
  CHECK(weighted_sign(1, -2, 0.5) == 0);
  // The double nearest 0.01 is slightly above it, so 1 - 100*lambda < 0.
  CHECK(weighted_sign(1, -100, 0.01) == -1);
  CHECK(weighted_sign(1, -99, 0.01) == 1);
  CHECK(weighted_sign(0, 5, 0.0) == 0);
  CHECK(weighted_sign(-3, 5, 0.0) == -1);
  CHECK(weighted_sign(0, 1, 1e-300) == 1);
  CHECK(weighted_sign(1, -1000000, 1e-300) == 1);

  // Agreement with plain double arithmetic when far from ties.
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const std::int64_t tp = rng.uniform_int(-50000, 50000);
    const std::int64_t z = rng.uniform_int(-50000, 50000);
    const double lambda = rng.uniform01() * 2.0;
    const double value = static_cast<double>(tp) + lambda * static_cast<double>(z);
    if (std::abs(value) < 1e-6) continue;
    CHECK(weighted_sign(tp, z, lambda) == (value > 0 ? 1 : -1));
  }
}
