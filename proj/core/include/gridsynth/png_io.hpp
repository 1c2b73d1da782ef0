#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridsynth/grid.hpp"

namespace gridsynth {

struct RawImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB8
};

// Reads any 8-bit PNG as RGB; an alpha channel, if present, is discarded by
// compositing against black.
RawImage read_png(const std::string& path);

void write_png(const std::string& path, int width, int height, const std::uint8_t* rgb);
void write_png(const std::string& path, const GridImage& img);

// Reads a PNG and interprets it as an N x N grid of M x M cells. Rejects
// images whose dimensions are not exactly N*M x N*M.
GridImage load_grid_image(const std::string& path, int grid_n, int cell_m);

}  // namespace gridsynth
