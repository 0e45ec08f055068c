#include "dga/image.hpp"

#include "doctest.h"

using namespace dga;

TEST_CASE("single all-ones tile is a bit-exact white PGM") {
  Matrix means(4, 1);
  means << 1, 1, 1, 1;
  const std::vector<std::uint8_t> bytes = render_pgm_grid(means, 1, 1, 2, 2);

  const std::string header = "P5 2 2 255\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) ==
        header);
  for (std::size_t i = header.size(); i < bytes.size(); ++i) {
    CHECK(bytes[i] == 0xFF);
  }
}

TEST_CASE("mid-gray quantizes to floor(0.5 * 255)") {
  Matrix means = Matrix::Constant(4, 1, 0.5);
  const std::vector<std::uint8_t> bytes = render_pgm_grid(means, 1, 1, 2, 2);
  for (std::size_t i = bytes.size() - 4; i < bytes.size(); ++i) {
    CHECK(bytes[i] == 127);
  }
}

TEST_CASE("a 10x10 grid of 28x28 images is 280x280") {
  Matrix means = Matrix::Constant(784, 100, 0.25);
  const std::vector<std::uint8_t> bytes = render_pgm_grid(means, 10, 10, 28, 28);
  const std::string header = "P5 280 280 255\n";
  REQUIRE(bytes.size() == header.size() + 280 * 280);
  CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) ==
        header);
}

TEST_CASE("missing cells stay black; overflow is rejected") {
  Matrix means = Matrix::Constant(4, 2, 1.0);
  const std::vector<std::uint8_t> bytes = render_pgm_grid(means, 2, 2, 2, 2);
  // last tile (bottom-right) untouched
  CHECK(bytes.back() == 0);

  Matrix too_many = Matrix::Constant(4, 5, 1.0);
  CHECK_THROWS_AS(render_pgm_grid(too_many, 2, 2, 2, 2), ConfigError);
}

TEST_CASE("pixel count must match the tile size") {
  Matrix means = Matrix::Constant(5, 1, 1.0);
  CHECK_THROWS_AS(render_pgm_grid(means, 1, 1, 2, 2), ConfigError);
}

TEST_CASE("tiles land in row-major grid order") {
  Matrix means(1, 3);  // 1x1 images
  means << 0.0, 0.5, 1.0;
  const std::vector<std::uint8_t> bytes = render_pgm_grid(means, 2, 2, 1, 1);
  const std::string header = "P5 2 2 255\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(bytes[header.size() + 0] == 0);
  CHECK(bytes[header.size() + 1] == 127);
  CHECK(bytes[header.size() + 2] == 255);
  CHECK(bytes[header.size() + 3] == 0);
}
