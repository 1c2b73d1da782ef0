#include "gridsynth/png_io.hpp"

#include <png.h>

#include <cstring>

#include "gridsynth/errors.hpp"

namespace gridsynth {

RawImage read_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw InputError("cannot read PNG '" + path + "': " + image.message);
  image.format = PNG_FORMAT_RGB;
  RawImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  const png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, out.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw InputError("cannot decode PNG '" + path + "': " + image.message);
  }
  return out;
}

void write_png(const std::string& path, int width, int height, const std::uint8_t* rgb) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, rgb, 0, nullptr))
    throw InputError("cannot write PNG '" + path + "': " + image.message);
}

void write_png(const std::string& path, const GridImage& img) {
  write_png(path, img.side(), img.side(), img.pixels().data());
}

GridImage load_grid_image(const std::string& path, int grid_n, int cell_m) {
  if (grid_n < 1 || cell_m < 1) throw InputError("grid_n and cell_m must be >= 1");
  RawImage raw = read_png(path);
  const int want = grid_n * cell_m;
  if (raw.width != want || raw.height != want)
    throw InputError("'" + path + "' is " + std::to_string(raw.width) + "x" +
                     std::to_string(raw.height) + ", expected " + std::to_string(want) +
                     "x" + std::to_string(want) + " for a " + std::to_string(grid_n) +
                     "x" + std::to_string(grid_n) + " grid of " + std::to_string(cell_m) +
                     "px cells");
  return GridImage(grid_n, cell_m, std::move(raw.pixels));
}

}  // namespace gridsynth
