#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gridsynth/program.hpp"
#include "gridsynth/rng.hpp"

namespace gridsynth {

// One of the 25 latent tile identities: a glyph label crossed with a color.
struct LatentProperty {
  int label = 0;  // {0..4}
  int color = 0;  // index into color_name()/color_value()

  int index() const { return label * 5 + color; }
  static LatentProperty from_index(int i) { return {i / 5, i % 5}; }
  bool operator==(const LatentProperty&) const = default;
};

inline constexpr int kPropertyCount = 25;

const char* color_name(int color);  // red, blue, orange, green, yellow
Rgb color_value(int color);

struct ParamStats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Per-property distribution of the six sketch parameters.
struct SketchStats {
  ParamStats n, a, b, n2, a2, b2;
};

struct GeneratorSpec {
  int grid_n = 9;
  int cell_m = 16;
  int k = 12;
  std::array<std::array<double, kPropertyCount>, kPropertyCount> transition{};
  std::array<SketchStats, kPropertyCount> sketch_stats{};
  bool noise = true;  // per-iteration tile resampling
  std::uint64_t seed = 0;
  std::string tile_source = "procedural";  // or a directory of <label>_*.png tiles
  Rgb background{40, 40, 40};
  int variants_per_label = 6;
  // True while transition/sketch_stats hold the built-in placeholder values;
  // echoed into the corpus manifest.
  bool default_stats = true;
};

// Placeholder defaults: transition rows put 0.6 on self and 0.4 spread over
// three fixed successors; every property gets means (n=3, a=2, b=1) per axis
// with unit spread.
GeneratorSpec default_generator_spec();

void validate(const GeneratorSpec& spec);
std::uint64_t spec_hash(const GeneratorSpec& spec);

std::string spec_to_json(const GeneratorSpec& spec);
GeneratorSpec spec_from_json(const std::string& json_text);

// Grayscale glyphs grouped by label. Same-label tiles share stroke geometry
// and differ in intensity detail, standing in for instances of one symbol.
class TileBank {
 public:
  static TileBank procedural(int cell_m, int variants_per_label, std::uint64_t seed);
  static TileBank from_directory(const std::string& dir, int cell_m);
  static TileBank for_spec(const GeneratorSpec& spec);

  int cell_m() const { return cell_m_; }
  int count(int label) const { return static_cast<int>(tiles_[label].size()); }
  const std::vector<std::uint8_t>& tile(int label, int idx) const {
    return tiles_[label][idx];
  }

 private:
  int cell_m_ = 0;
  std::array<std::vector<std::vector<std::uint8_t>>, 5> tiles_;
};

// Glyph intensity g blended between the named color and the background:
// p = (g*color + (255-g)*bg) / 255 per channel.
std::vector<std::uint8_t> colorize(const std::vector<std::uint8_t>& gray, int cell_m,
                                   Rgb color, Rgb background);

// A sampled program plus its per-pair latent annotations.
struct GeneratedProgram {
  Program program;  // components embed the recolored base tiles
  std::vector<LatentProperty> properties;
  std::vector<int> base_tiles;  // bank index of each pair's base tile
};

// Samples k correlated (sketch, component) pairs: the first property is
// uniform, later ones follow the transition row of their predecessor; sketch
// parameters are rounded clamped normals repaired to fit the grid (iteration
// count shrinks first, then the offset).
GeneratedProgram sample_program(const GeneratorSpec& spec, const TileBank& bank, Rng& rng);

// Executes the program; with noise on, every loop iteration renders a
// different same-label tile recolored identically instead of the base tile.
GridImage render_noisy(const GeneratedProgram& gp, const GeneratorSpec& spec,
                       const TileBank& bank, Rng& rng);

// Writes count instances (full PNG, ground-truth program, bottom-occluded
// partial PNG + mask, manifest.jsonl, spec.json) into out_dir. Instance i is
// a pure function of (spec, i).
void generate_corpus(const GeneratorSpec& spec, int count, double occlusion,
                     const std::string& out_dir);

}  // namespace gridsynth
