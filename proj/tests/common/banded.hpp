#pragma once

// Corpus family used by the roundtrip and completion suites: every pair
// paints a full-height column band. Property p mod 3 selects the band
// geometry, all axis-maximal against N=9:
//   role 0: cols 1..9  (n2=9, b2=0)   role 1: cols 4..9 (n2=6, b2=3)
//   role 2: cols 7..9  (n2=3, b2=6)
// The transition matrix rotates roles, so any window of three consecutive
// pairs touches every band and the union of covers is always the whole grid.
// Labels and colors vary across properties, giving distinct band contents.

#include <algorithm>

#include "gridsynth/datagen.hpp"
#include "gridsynth/grid.hpp"

namespace testcommon {

using namespace gridsynth;

inline GeneratorSpec banded_spec(std::uint64_t seed, int k, bool noise) {
  GeneratorSpec spec = default_generator_spec();
  spec.grid_n = 9;
  spec.cell_m = 16;
  spec.k = k;
  spec.noise = noise;
  spec.seed = seed;
  spec.default_stats = false;

  for (int p = 0; p < kPropertyCount; ++p) {
    SketchStats& st = spec.sketch_stats[p];
    st.n = {9.0, 0.0};
    st.a = {1.0, 0.0};
    st.b = {0.0, 0.0};
    const int role = p % 3;
    st.n2 = {9.0 - 3.0 * role, 0.0};
    st.a2 = {1.0, 0.0};
    st.b2 = {3.0 * role, 0.0};
  }

  const auto role_count = [](int role) { return role == 0 ? 9 : 8; };
  for (int p = 0; p < kPropertyCount; ++p) {
    auto& row = spec.transition[p];
    row.fill(0.0);
    const int next_role = (p + 1) % 3;
    for (int j = 0; j < 3; ++j) {
      const int member = (p / 3 + 1 + j) % role_count(next_role);
      row[next_role + 3 * member] += 1.0 / 3.0;
    }
  }
  return spec;
}

// Class id of each cell: the property index of the last pair covering it,
// or -1 for background cells.
inline std::vector<int> last_writer_classes(const GeneratedProgram& gp) {
  const int n = gp.program.grid_n;
  std::vector<int> cls(static_cast<std::size_t>(n) * n, -1);
  for (std::size_t h = 0; h < gp.program.pairs.size(); ++h)
    for (const CellIndex c : cover(gp.program.pairs[h].first))
      cls[static_cast<std::size_t>(c.t - 1) * n + (c.u - 1)] =
          gp.properties[h].index();
  return cls;
}

struct EpsCalibration {
  double max_intra = 0.0;
  double min_inter = 1e100;
  double eps = 0.0;
  bool separable = true;
};

// Midpoint threshold between same-class and cross-class cell distances.
inline EpsCalibration calibrate_eps(const GridImage& img, const GeneratedProgram& gp,
                                    const DistanceConfig& cfg) {
  const int n = img.grid_n();
  const std::vector<int> cls = last_writer_classes(gp);
  std::vector<SubImage> tiles;
  tiles.reserve(static_cast<std::size_t>(n) * n);
  for (int t = 1; t <= n; ++t)
    for (int u = 1; u <= n; ++u) tiles.push_back(subimage(img, {t, u}));

  EpsCalibration out;
  for (std::size_t i = 0; i < tiles.size(); ++i)
    for (std::size_t j = i + 1; j < tiles.size(); ++j) {
      const double d = distance(tiles[i], tiles[j], cfg);
      if (cls[i] == cls[j])
        out.max_intra = std::max(out.max_intra, d);
      else
        out.min_inter = std::min(out.min_inter, d);
    }
  if (out.min_inter > 1e99) out.min_inter = 1.0;  // single class
  out.separable = out.max_intra < out.min_inter;
  out.eps = 0.5 * (out.max_intra + out.min_inter);
  return out;
}

}  // namespace testcommon
