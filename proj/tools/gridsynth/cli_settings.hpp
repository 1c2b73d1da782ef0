#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "gridsynth/datagen.hpp"
#include "gridsynth/synthesis.hpp"

namespace gridsynth::cli {

// Everything configurable from flags, a key=value config file, or
// GRIDSYNTH_* environment variables. Precedence: flag > file > env > default.
struct Settings {
  int grid_n = -1;  // mandatory where an image is read
  int cell_m = -1;
  int k = 12;
  double eps = 0.15;
  double lambda = 0.01;
  int min_cover = 1;
  bool early_stop = true;
  int hist_bins = 16;
  double w_emd = 0.5;
  double w_struct = 0.5;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = all hardware threads
  int count = 10;
  double occlusion = 0.0;
  bool noise = true;
  std::string tile_source = "procedural";
  std::string background = "0,0,0";
  int variants_per_label = 6;
  int tol = 0;
  long long budget = 20'000'000;

  SynthesisConfig synthesis() const {
    SynthesisConfig cfg;
    cfg.k = k;
    cfg.eps = eps;
    cfg.lambda = lambda;
    cfg.min_cover = min_cover;
    cfg.early_stop = early_stop;
    cfg.distance.hist_bins = hist_bins;
    cfg.distance.w_emd = w_emd;
    cfg.distance.w_struct = w_struct;
    return cfg;
  }
};

Rgb parse_color(const std::string& text);

// Key=value file with '#' comments; unknown keys are rejected.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace gridsynth::cli
