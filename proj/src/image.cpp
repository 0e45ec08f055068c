#include "dga/image.hpp"

#include <cmath>
#include <fstream>

namespace dga {

std::vector<std::uint8_t> render_pgm_grid(const Matrix& means, int grid_rows,
                                          int grid_cols, int img_h, int img_w) {
  if (grid_rows <= 0 || grid_cols <= 0 || img_h <= 0 || img_w <= 0) {
    throw ConfigError("render_pgm_grid: grid and image dimensions must be positive");
  }
  if (means.rows() != static_cast<Index>(img_h) * img_w) {
    throw ConfigError("render_pgm_grid: image size " + std::to_string(img_h) + "x" +
                      std::to_string(img_w) + " needs " +
                      std::to_string(static_cast<long>(img_h) * img_w) +
                      " pixels per column, got " + std::to_string(means.rows()));
  }
  if (means.cols() > static_cast<Index>(grid_rows) * grid_cols) {
    throw ConfigError("render_pgm_grid: " + std::to_string(means.cols()) +
                      " images do not fit a " + std::to_string(grid_rows) + "x" +
                      std::to_string(grid_cols) + " grid");
  }

  const int width = grid_cols * img_w;
  const int height = grid_rows * img_h;
  const std::string header = "P5 " + std::to_string(width) + " " +
                             std::to_string(height) + " 255\n";

  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.resize(bytes.size() + static_cast<std::size_t>(width) * height, 0);
  std::uint8_t* pixels = bytes.data() + header.size();

  for (Index img = 0; img < means.cols(); ++img) {
    const int tile_r = static_cast<int>(img) / grid_cols;
    const int tile_c = static_cast<int>(img) % grid_cols;
    for (int y = 0; y < img_h; ++y) {
      for (int x = 0; x < img_w; ++x) {
        const double v = means(static_cast<Index>(y) * img_w + x, img);
        const double scaled = std::floor(v * 255.0);
        const std::uint8_t byte =
            scaled <= 0.0 ? 0 : scaled >= 255.0 ? 255 : static_cast<std::uint8_t>(scaled);
        pixels[static_cast<std::size_t>(tile_r * img_h + y) * width +
               static_cast<std::size_t>(tile_c * img_w + x)] = byte;
      }
    }
  }
  return bytes;
}

void write_pgm_grid(const Matrix& means, int grid_rows, int grid_cols, int img_h,
                    int img_w, const std::string& path) {
  const std::vector<std::uint8_t> bytes =
      render_pgm_grid(means, grid_rows, grid_cols, img_h, img_w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError(path + ": cannot open for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FormatError(path + ": write failed");
  }
}

}  // namespace dga
