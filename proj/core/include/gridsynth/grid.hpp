#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gridsynth/tensor.hpp"

namespace gridsynth {

// 1-based grid coordinates, row t and column u in [1, N].
struct CellIndex {
  int t = 1;
  int u = 1;

  bool operator==(const CellIndex&) const = default;
  auto operator<=>(const CellIndex&) const = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// An RGB8 raster of side grid_n * cell_m, partitioned into grid_n x grid_n
// cells of cell_m x cell_m pixels each.
class GridImage {
 public:
  GridImage() = default;
  GridImage(int grid_n, int cell_m, Rgb fill = {});
  GridImage(int grid_n, int cell_m, std::vector<std::uint8_t> pixels);

  int grid_n() const { return grid_n_; }
  int cell_m() const { return cell_m_; }
  int side() const { return grid_n_ * cell_m_; }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

  const std::uint8_t* px(int x, int y) const {
    return pixels_.data() + 3 * (static_cast<std::size_t>(y) * side() + x);
  }
  std::uint8_t* px(int x, int y) {
    return pixels_.data() + 3 * (static_cast<std::size_t>(y) * side() + x);
  }

  void require_cell(CellIndex cell) const;

  // Copies an M x M tile (row-major RGB8, 3*M*M bytes) into the given cell.
  void blit_cell(CellIndex cell, const std::uint8_t* tile);
  void fill_cell(CellIndex cell, Rgb color);

  bool operator==(const GridImage&) const = default;

 private:
  int grid_n_ = 0;
  int cell_m_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// An M x M RGB8 tile, optionally remembering which cell it was cut from.
struct SubImage {
  int side = 0;
  std::vector<std::uint8_t> pixels;  // 3 * side * side bytes
  std::optional<CellIndex> origin;

  bool same_pixels(const SubImage& other) const {
    return side == other.side && pixels == other.pixels;
  }
};

struct DistanceConfig {
  int hist_bins = 16;     // per-channel histogram resolution, >= 2
  double w_emd = 0.5;     // weight on the color-histogram earthmover term
  double w_struct = 0.5;  // weight on the structural (1 - NCC) term
};

void validate(const DistanceConfig& cfg);

// The M x M pixel block at grid position (t, u).
SubImage subimage(const GridImage& img, CellIndex cell);

// Weighted sum of a per-channel 1D earthmover distance between intensity
// histograms and a structural term 1 - NCC over grayscale pixels, both
// normalized to [0, 1]. Exactly symmetric in its arguments.
double distance(const SubImage& a, const SubImage& b, const DistanceConfig& cfg);

// B[t,u,t',u'] = 1 iff distance(x_tu, x_t'u') <= eps. Each unordered pair is
// evaluated once and mirrored; the result is bit-identical for any thread
// count.
SimilarityTensor build_similarity_tensor(const GridImage& img, double eps,
                                         const DistanceConfig& cfg, int threads = 1);

}  // namespace gridsynth
