#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dga/numerics.hpp"

namespace dga {

/// Renders mean images (one per column of `means`, pixels row-major,
/// img_h * img_w per column) into an 8-bit grayscale grid and returns the
/// PGM (P5) file bytes. Header is "P5 <w> <h> 255\n"; pixel byte =
/// floor(mean * 255), so 0 is black and 1 is white. Missing cells (fewer
/// columns than grid slots) are left black; extra columns are a ConfigError.
std::vector<std::uint8_t> render_pgm_grid(const Matrix& means, int grid_rows,
                                          int grid_cols, int img_h, int img_w);

void write_pgm_grid(const Matrix& means, int grid_rows, int grid_cols, int img_h,
                    int img_w, const std::string& path);

}  // namespace dga
