#include <doctest.h>

#include <filesystem>

#include "banded.hpp"
#include <set>

#include "gridsynth/datagen.hpp"
#include "gridsynth/extrapolation.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace gridsynth;
using namespace testutil;

TEST_CASE("default generator spec validates") {
  const GeneratorSpec spec = default_generator_spec();
  validate(spec);
  for (const auto& row : spec.transition) {
    double sum = 0.0;
    for (double v : row) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("spec JSON roundtrips") {
  GeneratorSpec spec = testcommon::banded_spec(9, 4, true);
  spec.background = {10, 20, 30};
  const std::string text = spec_to_json(spec);
  const GeneratorSpec back = spec_from_json(text);
  CHECK(spec_to_json(back) == text);
  CHECK(back.default_stats == false);
  CHECK(spec_hash(back) == spec_hash(spec));

  CHECK_THROWS_AS(spec_from_json("{nope"), InputError);
  CHECK_THROWS_AS(spec_from_json("{\"grid_n\": 0}"), InputError);
}

TEST_CASE("zero spread makes sketch parameters equal the repaired means") {
  GeneratorSpec spec = default_generator_spec();
  spec.k = 6;
  for (auto& st : spec.sketch_stats) {
    st.n = {3.0, 0.0};
    st.a = {2.0, 0.0};
    st.b = {1.0, 0.0};
    st.n2 = {4.0, 0.0};
    st.a2 = {2.0, 0.0};
    st.b2 = {0.0, 0.0};
  }
  const TileBank bank = TileBank::for_spec(spec);
  Rng rng(1);
  const GeneratedProgram gp = sample_program(spec, bank, rng);
  for (const auto& [s, c] : gp.program.pairs) {
    CHECK(s == Sketch{3, 2, 1, 4, 2, 0});
  }
}

TEST_CASE("the repair clamps the count first and then the offset") {
  GeneratorSpec spec = default_generator_spec();
  spec.k = 1;
  for (auto& st : spec.sketch_stats) {
    st.n = {9.0, 0.0};
    st.a = {2.0, 0.0};
    st.b = {1.0, 0.0};  // 2*9+1 > 9 -> n shrinks to 4
    st.n2 = {1.0, 0.0};
    st.a2 = {9.0, 0.0};
    st.b2 = {5.0, 0.0};  // 9*1+5 > 9 -> n2=1, then b2 = 0
  }
  const TileBank bank = TileBank::for_spec(spec);
  Rng rng(2);
  const GeneratedProgram gp = sample_program(spec, bank, rng);
  const Sketch s = gp.program.pairs[0].first;
  CHECK(s.n == 4);
  CHECK(s.b == 1);
  CHECK(s.n2 == 1);
  CHECK(s.b2 == 0);
  validate(gp.program);
}

TEST_CASE("an identity transition keeps one latent property throughout") {
  GeneratorSpec spec = default_generator_spec();
  spec.k = 8;
  for (int p = 0; p < kPropertyCount; ++p) {
    spec.transition[p].fill(0.0);
    spec.transition[p][p] = 1.0;
  }
  const TileBank bank = TileBank::for_spec(spec);
  Rng rng(3);
  const GeneratedProgram gp = sample_program(spec, bank, rng);
  for (const LatentProperty& lp : gp.properties) CHECK(lp == gp.properties[0]);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  const GeneratorSpec spec = testcommon::banded_spec(123, 5, true);
  const TileBank bank = TileBank::for_spec(spec);
  Rng a(77), b(77);
  const GeneratedProgram ga = sample_program(spec, bank, a);
  const GeneratedProgram gb = sample_program(spec, bank, b);
  CHECK(serialize(ga.program) == serialize(gb.program));
  const GridImage ia = render_noisy(ga, spec, bank, a);
  const GridImage ib = render_noisy(gb, spec, bank, b);
  CHECK(ia == ib);
}

TEST_CASE("every label holds at least two distinct tiles") {
  const TileBank bank = TileBank::procedural(16, 6, 42);
  for (int label = 0; label < 5; ++label) {
    REQUIRE(bank.count(label) >= 2);
    for (int i = 0; i < bank.count(label); ++i)
      for (int j = i + 1; j < bank.count(label); ++j)
        CHECK(bank.tile(label, i) != bank.tile(label, j));
  }
}

TEST_CASE("noise off renders exactly the embedded components") {
  const GeneratorSpec spec = testcommon::banded_spec(8, 3, false);
  const TileBank bank = TileBank::for_spec(spec);
  Rng rng(4);
  const GeneratedProgram gp = sample_program(spec, bank, rng);
  const GridImage rendered = render_noisy(gp, spec, bank, rng);
  const StructureRendering direct = execute(gp.program, spec.background);
  CHECK(rendered == direct.image);
}

TEST_CASE("noise picks a different same-label tile per iteration") {
  GeneratorSpec spec = testcommon::banded_spec(15, 2, true);
  spec.variants_per_label = 2;
  const TileBank bank = TileBank::for_spec(spec);
  Rng rng(5);
  const GeneratedProgram gp = sample_program(spec, bank, rng);
  const GridImage rendered = render_noisy(gp, spec, bank, rng);

  const std::vector<int> cls = testcommon::last_writer_classes(gp);
  for (int t = 1; t <= 9; ++t)
    for (int u = 1; u <= 9; ++u) {
      const int id = cls[(t - 1) * 9 + (u - 1)];
      if (id < 0) continue;
      const LatentProperty lp = LatentProperty::from_index(id);
      const SubImage cell = subimage(rendered, {t, u});
      bool matched = false;
      for (int v = 0; v < bank.count(lp.label); ++v) {
        const auto tile = colorize(bank.tile(lp.label, v), 16,
                                   color_value(lp.color), spec.background);
        matched = matched || cell.pixels == tile;
      }
      CHECK(matched);
    }
}

TEST_CASE("corpus generation is reproducible and honors occlusion") {
  const auto dir_a = fresh_dir("corpus_a");
  const auto dir_b = fresh_dir("corpus_b");
  const GeneratorSpec spec = testcommon::banded_spec(99, 3, false);

  generate_corpus(spec, 3, 1.0 / 3.0, dir_a.string());
  generate_corpus(spec, 3, 1.0 / 3.0, dir_b.string());
  for (const char* name :
       {"manifest.jsonl", "spec.json", "0_full.png", "0_partial.png", "0.mask",
        "0.prog", "2_full.png", "2.prog"})
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));

  // Bottom third of 9 rows -> 3 masked rows.
  const CellSet known = parse_mask(slurp(dir_a / "0.mask"));
  CHECK(known.count() == 54);
  for (int u = 1; u <= 9; ++u) {
    CHECK(known.test(6, u));
    CHECK_FALSE(known.test(7, u));
  }

  // Occlusion zero: partial equals full, mask all ones.
  const auto dir_c = fresh_dir("corpus_c");
  generate_corpus(spec, 1, 0.0, dir_c.string());
  CHECK(slurp(dir_c / "0_full.png") == slurp(dir_c / "0_partial.png"));
  CHECK(parse_mask(slurp(dir_c / "0.mask")) == CellSet::full(9));

  // Manifest lines carry distinct derived seeds.
  const std::string manifest = slurp(dir_a / "manifest.jsonl");
  CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 3);
  std::set<std::string> seeds;
  std::istringstream lines(manifest);
  std::string line;
  while (std::getline(lines, line)) {
    const auto pos = line.find("\"seed\":");
    REQUIRE(pos != std::string::npos);
    seeds.insert(line.substr(pos, 24));
  }
  CHECK(seeds.size() == 3);
}

TEST_CASE("generated programs always validate") {
  Rng seed_rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    GeneratorSpec spec = default_generator_spec();
    spec.k = 12;
    spec.seed = seed_rng.next_u64();
    const TileBank bank = TileBank::for_spec(spec);
    Rng rng(mix_seed(spec.seed, 0));
    const GeneratedProgram gp = sample_program(spec, bank, rng);
    validate(gp.program);
    CHECK(gp.program.pairs.size() == 12);
  }
}
