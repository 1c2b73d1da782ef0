#include "gridsynth/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "gridsynth/parallel.hpp"

namespace gridsynth {

GridImage::GridImage(int grid_n, int cell_m, Rgb fill) : grid_n_(grid_n), cell_m_(cell_m) {
  if (grid_n < 1 || cell_m < 1)
    throw InputError("grid_n and cell_m must be >= 1");
  pixels_.resize(3 * static_cast<std::size_t>(side()) * side());
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

GridImage::GridImage(int grid_n, int cell_m, std::vector<std::uint8_t> pixels)
    : grid_n_(grid_n), cell_m_(cell_m), pixels_(std::move(pixels)) {
  if (grid_n < 1 || cell_m < 1)
    throw InputError("grid_n and cell_m must be >= 1");
  const std::size_t expect = 3 * static_cast<std::size_t>(side()) * side();
  if (pixels_.size() != expect)
    throw InputError("pixel buffer holds " + std::to_string(pixels_.size()) +
                     " bytes, expected " + std::to_string(expect));
}

void GridImage::require_cell(CellIndex cell) const {
  if (cell.t < 1 || cell.t > grid_n_ || cell.u < 1 || cell.u > grid_n_)
    throw InputError("cell (" + std::to_string(cell.t) + "," + std::to_string(cell.u) +
                     ") outside grid of size " + std::to_string(grid_n_));
}

void GridImage::blit_cell(CellIndex cell, const std::uint8_t* tile) {
  require_cell(cell);
  const int m = cell_m_;
  const int x0 = (cell.u - 1) * m;
  const int y0 = (cell.t - 1) * m;
  for (int dy = 0; dy < m; ++dy)
    std::memcpy(px(x0, y0 + dy), tile + 3 * static_cast<std::size_t>(dy) * m,
                3 * static_cast<std::size_t>(m));
}

void GridImage::fill_cell(CellIndex cell, Rgb color) {
  require_cell(cell);
  const int m = cell_m_;
  const int x0 = (cell.u - 1) * m;
  const int y0 = (cell.t - 1) * m;
  for (int dy = 0; dy < m; ++dy) {
    std::uint8_t* p = px(x0, y0 + dy);
    for (int dx = 0; dx < m; ++dx) {
      p[3 * dx] = color.r;
      p[3 * dx + 1] = color.g;
      p[3 * dx + 2] = color.b;
    }
  }
}

void validate(const DistanceConfig& cfg) {
  if (cfg.hist_bins < 2) throw InputError("hist_bins must be >= 2");
  if (cfg.w_emd < 0 || cfg.w_struct < 0)
    throw InputError("distance weights must be nonnegative");
  if (cfg.w_emd + cfg.w_struct <= 0)
    throw InputError("at least one distance weight must be positive");
}

SubImage subimage(const GridImage& img, CellIndex cell) {
  img.require_cell(cell);
  const int m = img.cell_m();
  SubImage out;
  out.side = m;
  out.origin = cell;
  out.pixels.resize(3 * static_cast<std::size_t>(m) * m);
  const int x0 = (cell.u - 1) * m;
  const int y0 = (cell.t - 1) * m;
  for (int dy = 0; dy < m; ++dy)
    std::memcpy(out.pixels.data() + 3 * static_cast<std::size_t>(dy) * m,
                img.px(x0, y0 + dy), 3 * static_cast<std::size_t>(m));
  return out;
}

namespace {

// Precomputed per-tile statistics. Gray values are kept as the integer sum
// r+g+b (a constant factor of the mean intensity, which NCC is invariant to),
// so all accumulations below are exact.
struct TileStats {
  std::vector<std::int64_t> cum;  // 3 channels * bins cumulative counts
  std::vector<std::int32_t> gray;
  std::int64_t gray_sum = 0;
  std::int64_t gray_sq_sum = 0;
};

TileStats tile_stats(const std::uint8_t* px, int pixel_count, int bins) {
  TileStats s;
  s.cum.assign(3 * static_cast<std::size_t>(bins), 0);
  s.gray.resize(pixel_count);
  for (int i = 0; i < pixel_count; ++i) {
    const int r = px[3 * i], g = px[3 * i + 1], b = px[3 * i + 2];
    s.cum[0 * bins + r * bins / 256] += 1;
    s.cum[1 * bins + g * bins / 256] += 1;
    s.cum[2 * bins + b * bins / 256] += 1;
    const std::int32_t v = r + g + b;
    s.gray[i] = v;
    s.gray_sum += v;
    s.gray_sq_sum += static_cast<std::int64_t>(v) * v;
  }
  for (int c = 0; c < 3; ++c)
    for (int i = 1; i < bins; ++i) s.cum[c * bins + i] += s.cum[c * bins + i - 1];
  return s;
}

double stats_distance(const TileStats& a, const TileStats& b, int pixel_count,
                      const DistanceConfig& cfg) {
  const int bins = cfg.hist_bins;
  std::int64_t emd_abs = 0;
  for (std::size_t i = 0; i < a.cum.size(); ++i)
    emd_abs += std::llabs(a.cum[i] - b.cum[i]);
  const double emd = static_cast<double>(emd_abs) /
                     (3.0 * pixel_count * (bins - 1));

  const std::int64_t n = pixel_count;
  const std::int64_t var_a = n * a.gray_sq_sum - a.gray_sum * a.gray_sum;
  const std::int64_t var_b = n * b.gray_sq_sum - b.gray_sum * b.gray_sum;
  double ncc;
  if (var_a == 0 || var_b == 0) {
    // Flat tile convention: match iff mean intensities differ by < 1/255.
    // Mean intensity is gray_sum / (3n); compare as integers.
    ncc = std::llabs(a.gray_sum - b.gray_sum) * 255 < 3 * n ? 1.0 : 0.0;
  } else {
    std::int64_t dot = 0;
    for (int i = 0; i < pixel_count; ++i)
      dot += static_cast<std::int64_t>(a.gray[i]) * b.gray[i];
    const double num = static_cast<double>(n * dot - a.gray_sum * b.gray_sum);
    ncc = num / std::sqrt(static_cast<double>(var_a) * static_cast<double>(var_b));
  }
  const double structural = std::clamp(1.0 - ncc, 0.0, 1.0);
  return cfg.w_emd * emd + cfg.w_struct * structural;
}

}  // namespace

double distance(const SubImage& a, const SubImage& b, const DistanceConfig& cfg) {
  validate(cfg);
  if (a.side != b.side)
    throw InputError("sub-image sizes differ: " + std::to_string(a.side) + " vs " +
                     std::to_string(b.side));
  const int pixels = a.side * a.side;
  const TileStats sa = tile_stats(a.pixels.data(), pixels, cfg.hist_bins);
  const TileStats sb = tile_stats(b.pixels.data(), pixels, cfg.hist_bins);
  return stats_distance(sa, sb, pixels, cfg);
}

SimilarityTensor build_similarity_tensor(const GridImage& img, double eps,
                                         const DistanceConfig& cfg, int threads) {
  validate(cfg);
  if (eps < 0) throw InputError("eps must be nonnegative");
  const int n = img.grid_n();
  const int cells = n * n;
  const int m = img.cell_m();
  const int pixel_count = m * m;

  std::vector<TileStats> stats(cells);
  parallel_chunks(cells, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const CellIndex cell{static_cast<int>(c) / n + 1, static_cast<int>(c) % n + 1};
      const SubImage tile = subimage(img, cell);
      stats[c] = tile_stats(tile.pixels.data(), pixel_count, cfg.hist_bins);
    }
  });

  // Unordered pairs (i < j), each scored once into its own slot; packing into
  // shared words happens single-threaded afterwards.
  const std::size_t pair_count = static_cast<std::size_t>(cells) * (cells - 1) / 2;
  std::vector<std::uint8_t> similar(pair_count, 0);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(pair_count);
  for (int i = 0; i < cells; ++i)
    for (int j = i + 1; j < cells; ++j) pairs.emplace_back(i, j);
  parallel_chunks(pair_count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto [i, j] = pairs[p];
      similar[p] = stats_distance(stats[i], stats[j], pixel_count, cfg) <= eps;
    }
  });

  SimilarityTensor out(n);
  for (int c = 0; c < cells; ++c) out.set_pair(c, c);
  for (std::size_t p = 0; p < pair_count; ++p)
    if (similar[p]) out.set_pair(pairs[p].first, pairs[p].second);
  return out;
}

}  // namespace gridsynth
