#include <doctest.h>

#include "banded.hpp"
#include "gridsynth/synthesis.hpp"
#include "test_util.hpp"

using namespace gridsynth;
using namespace testutil;

namespace {

// Independent counter for the per-axis option count.
long long axis_options(int grid_n) {
  long long count = 0;
  for (int n = 1; n <= grid_n; ++n)
    for (int a = 1; a <= grid_n; ++a)
      for (int b = 0; b <= grid_n; ++b)
        if (a * n + b <= grid_n) ++count;
  return count;
}

}  // namespace

TEST_CASE("objective of the empty program is lambda times the zero count") {
  Rng rng(3);
  const SimilarityTensor bx = random_tensor(3, 0.3, rng);
  Program p;
  p.grid_n = 3;
  p.cell_m = 1;
  const double zeros = static_cast<double>(81 - bx.ones_count());
  CHECK(objective(p, bx, 0.25) == 0.25 * zeros);
  CHECK(objective(p, bx, 0.0) == 0.0);
}

TEST_CASE("a full cover over an all-ones tensor scores N^4") {
  const int n = 3;
  SimilarityTensor bx(n);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) bx.set_pair(i, j);
  Program p;
  p.grid_n = n;
  p.cell_m = 1;
  Component c;
  c.source = CellIndex{1, 1};
  p.pairs = {{Sketch{3, 1, 0, 3, 1, 0}, c}};
  CHECK(objective(p, bx, 0.7) == 81.0);
}

TEST_CASE("objective on a hand-built sparse tensor matches the entrywise reference") {
  // 9 diagonal ones plus the symmetric pair (1,1)-(3,3): 11 ones total.
  SimilarityTensor bx(3);
  for (int i = 0; i < 9; ++i) bx.set_pair(i, i);
  bx.set_pair(bx.cell_id(1, 1), bx.cell_id(3, 3));
  CHECK(bx.ones_count() == 11);

  // Two singleton sketches covering cells (1,1) and (3,3). B^(P) then holds
  // only the two diagonal entries, so tp = 2 and 70 zero entries remain
  // agreed on: objective = 2 + 0.5 * 70 = 37.
  Program p;
  p.grid_n = 3;
  p.cell_m = 1;
  Component c;
  c.source = CellIndex{1, 1};
  p.pairs = {{Sketch{1, 1, 0, 1, 1, 0}, c}, {Sketch{1, 3, 0, 1, 3, 0}, c}};

  const ObjectiveCounts ref = reference_counts(bx, program_tensor(p));
  CHECK(ref.tp == 2);
  CHECK(ref.zeros_agree == 70);
  CHECK(objective(p, bx, 0.5) == ref.value(0.5));
  CHECK(objective(p, bx, 0.5) == 37.0);

  // A block cover that contains a similar pair picks up its off-diagonal
  // entries too; cross-checked entrywise.
  SimilarityTensor bx4(4);
  for (int i = 0; i < 16; ++i) bx4.set_pair(i, i);
  bx4.set_pair(bx4.cell_id(1, 1), bx4.cell_id(2, 2));
  Program q;
  q.grid_n = 4;
  q.cell_m = 1;
  q.pairs = {{Sketch{2, 1, 0, 2, 1, 0}, c}};  // block {1,2}x{1,2}
  const ObjectiveCounts got = objective_counts(bx4, program_tensor(q));
  CHECK(got.tp == 6);  // 4 diagonal entries + the symmetric similar pair
  CHECK(got == reference_counts(bx4, program_tensor(q)));
}

TEST_CASE("sketch enumeration matches hand counts and stays ordered") {
  const std::vector<Sketch> n1 = enumerate_sketches(1, 1);
  REQUIRE(n1.size() == 1);
  CHECK(n1[0] == Sketch{1, 1, 0, 1, 1, 0});

  CHECK(enumerate_sketches(2, 1).size() == 16);

  const long long axis9 = axis_options(9);
  CHECK(enumerate_sketches(9, 1).size() ==
        static_cast<std::size_t>(axis9) * axis9);

  const std::vector<Sketch> all = enumerate_sketches(4, 1);
  CHECK(std::is_sorted(all.begin(), all.end()));
  for (const Sketch& s : all) CHECK(sketch_fits(s, 4));

  // min_cover filters by n*n2.
  for (const Sketch& s : enumerate_sketches(4, 3)) CHECK(s.n * s.n2 >= 3);
  long long kept = 0;
  for (const Sketch& s : all)
    if (s.n * s.n2 >= 3) ++kept;
  CHECK(enumerate_sketches(4, 3).size() == static_cast<std::size_t>(kept));
}

TEST_CASE("greedy on a uniform image covers everything in one pair") {
  const GridImage img = uniform_image(4, 2, {90, 90, 90});
  SynthesisConfig cfg;
  cfg.k = 1;
  cfg.lambda = 0.0;
  cfg.eps = 0.05;
  const ScoredProgram out = greedy_synthesize(img, cfg);
  REQUIRE(out.program.pairs.size() == 1);
  CHECK(cover_cells(out.program.pairs[0].first, 4).count() == 16);
  CHECK(out.objective == 256.0);  // N^4
}

TEST_CASE("greedy against the oracle on pairwise-distinct cells") {
  // With eps=0 only the diagonal survives; every multi-cell candidate still
  // gains its diagonal entries, so the optimum covers the full grid.
  const GridImage img = all_distinct_image(3, 2);
  SynthesisConfig cfg;
  cfg.k = 2;
  cfg.lambda = 0.0;
  cfg.eps = 0.0;
  cfg.min_cover = 2;
  const ScoredProgram greedy = greedy_synthesize(img, cfg);
  const ScoredProgram oracle = oracle_synthesize(img, cfg);
  CHECK(oracle.objective >= greedy.objective);
  CHECK(greedy.objective == oracle.objective);  // full grid is reachable
  CHECK(greedy.objective == 9.0);
  for (const double gain : greedy.per_step_gains) CHECK(gain > 0.0);
}

TEST_CASE("noise-free roundtrip recovers the ground-truth cover union") {
  // With lambda = 0 a full-grid sketch always maximizes the gain, so cover
  // recovery is exact precisely when the truth spans the grid; pick a seed
  // whose two pairs include the full-width band.
  GeneratedProgram gp;
  GridImage img(9, 16);
  GeneratorSpec spec;
  for (std::uint64_t seed = 17;; ++seed) {
    spec = testcommon::banded_spec(seed, 2, false);
    const TileBank bank = TileBank::for_spec(spec);
    Rng rng(mix_seed(spec.seed, 0));
    gp = sample_program(spec, bank, rng);
    if (gp.properties[0].index() % 3 == 0) {
      img = render_noisy(gp, spec, bank, rng);
      break;
    }
  }

  SynthesisConfig cfg;
  cfg.k = 2;
  cfg.lambda = 0.0;
  const auto cal = testcommon::calibrate_eps(img, gp, cfg.distance);
  REQUIRE(cal.separable);
  cfg.eps = cal.max_intra < cal.min_inter ? cal.min_inter / 2 : cal.eps;

  const ScoredProgram out = greedy_synthesize(img, cfg);
  CellSet truth_union(9), pred_union(9);
  for (const auto& [s, c] : gp.program.pairs) truth_union |= cover_cells(s, 9);
  for (const auto& [s, c] : out.program.pairs) pred_union |= cover_cells(s, 9);
  CHECK(truth_union == pred_union);
}

TEST_CASE("incremental and recomputed gains choose identical programs") {
  Rng rng(71);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 1));
    const GridImage img = random_palette_image(n, 2, 3, rng);
    SynthesisConfig cfg;
    cfg.k = 3;
    cfg.lambda = trial % 2 == 0 ? 0.0 : 0.3;
    cfg.eps = 0.05;
    GreedyOptions naive;
    naive.naive_gains = true;
    const ScoredProgram fast = greedy_synthesize(img, cfg);
    const ScoredProgram slow = greedy_synthesize(img, cfg, naive);
    CHECK(fast.program == slow.program);
    CHECK(fast.objective == slow.objective);
  }
}

TEST_CASE("greedy is invariant to the scoring thread count") {
  Rng rng(83);
  const GridImage img = random_palette_image(4, 2, 3, rng);
  SynthesisConfig cfg;
  cfg.k = 3;
  cfg.lambda = 0.01;
  cfg.eps = 0.05;
  GreedyOptions one, many;
  one.threads = 1;
  many.threads = 8;
  const ScoredProgram a = greedy_synthesize(img, cfg, one);
  const ScoredProgram b = greedy_synthesize(img, cfg, many);
  CHECK(a.program == b.program);
  CHECK(a.objective == b.objective);
  CHECK(a.per_step_gains == b.per_step_gains);
}

TEST_CASE("oracle handles the single-cell grid and dominates greedy") {
  const GridImage tiny = uniform_image(1, 2, {1, 2, 3});
  SynthesisConfig cfg;
  cfg.k = 1;
  const ScoredProgram best = oracle_synthesize(tiny, cfg);
  REQUIRE(best.program.pairs.size() == 1);
  CHECK(best.objective == 1.0 + cfg.lambda * 0.0);

  Rng rng(29);
  for (int trial = 0; trial < 6; ++trial) {
    const GridImage img = random_palette_image(3, 2, 2, rng);
    SynthesisConfig c;
    c.k = 2;
    c.lambda = trial % 2 == 0 ? 0.01 : 0.5;
    c.eps = 0.05;
    const ScoredProgram greedy = greedy_synthesize(img, c);
    const ScoredProgram oracle = oracle_synthesize(img, c);
    CHECK(oracle.objective >= greedy.objective);
  }
}

TEST_CASE("oracle refuses instances beyond its budget") {
  const GridImage img = uniform_image(3, 2, {5, 5, 5});
  SynthesisConfig cfg;
  cfg.k = 3;
  OracleOptions opts;
  opts.budget = 10;
  try {
    oracle_synthesize(img, cfg, opts);
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(e.candidate_count() > 10);
  }
}

TEST_CASE("scored program invariants hold") {
  Rng rng(97);
  const GridImage img = random_palette_image(4, 2, 2, rng);
  SynthesisConfig cfg;
  cfg.k = 4;
  cfg.lambda = 0.01;
  cfg.eps = 0.05;
  const ScoredProgram out = greedy_synthesize(img, cfg);
  CHECK(out.program.pairs.size() <= 4);
  validate(out.program);
  const SimilarityTensor bx = build_similarity_tensor(img, cfg.eps, cfg.distance);
  CHECK(out.objective == objective(out.program, bx, cfg.lambda));
  CHECK(out.per_step_gains.size() == out.program.pairs.size());
  for (const double gain : out.per_step_gains) CHECK(gain > 0.0);  // early_stop on
}
