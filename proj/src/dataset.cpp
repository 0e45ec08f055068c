#include "dga/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dga {

namespace {

std::size_t row_stride(Index width) {
  return (static_cast<std::size_t>(width) + 7) / 8;
}

}  // namespace

BinaryDataset::BinaryDataset(Index rows, Index width,
                             std::vector<std::uint8_t> packed, Provenance prov)
    : rows_(rows),
      width_(width),
      stride_(row_stride(width)),
      packed_(std::move(packed)),
      prov_(std::move(prov)) {
  if (rows < 0 || width <= 0) {
    throw ConfigError("BinaryDataset: invalid shape " + shape_str(rows, width));
  }
  if (packed_.size() != static_cast<std::size_t>(rows) * stride_) {
    throw ShapeError("BinaryDataset: packed size " + std::to_string(packed_.size()) +
                     " does not hold " + shape_str(rows, width) + " bits");
  }
}

BinaryDataset BinaryDataset::from_rows(
    const std::vector<std::vector<std::uint8_t>>& rows, Provenance prov) {
  if (rows.empty() || rows.front().empty()) {
    throw ConfigError("BinaryDataset::from_rows: empty input");
  }
  const Index width = static_cast<Index>(rows.front().size());
  const std::size_t stride = row_stride(width);
  std::vector<std::uint8_t> packed(rows.size() * stride, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Index>(rows[r].size()) != width) {
      throw ShapeError("BinaryDataset::from_rows: row " + std::to_string(r) +
                       " has width " + std::to_string(rows[r].size()) +
                       ", expected " + std::to_string(width));
    }
    for (Index c = 0; c < width; ++c) {
      const std::uint8_t v = rows[r][static_cast<std::size_t>(c)];
      if (v > 1) {
        throw DomainError("BinaryDataset::from_rows: non-binary value");
      }
      packed[r * stride + (static_cast<std::size_t>(c) >> 3)] |=
          static_cast<std::uint8_t>(v << (c & 7));
    }
  }
  return BinaryDataset(static_cast<Index>(rows.size()), width, std::move(packed),
                       std::move(prov));
}

Vector BinaryDataset::row(Index r) const {
  Vector out(width_);
  row(r, out);
  return out;
}

void BinaryDataset::row(Index r, Vector& out) const {
  if (r < 0 || r >= rows_) {
    throw ShapeError("BinaryDataset::row: index " + std::to_string(r) +
                     " out of range for " + std::to_string(rows_) + " rows");
  }
  out.resize(width_);
  for (Index c = 0; c < width_; ++c) {
    out[c] = bit(r, c) ? 1.0 : 0.0;
  }
}

Matrix BinaryDataset::gather_columns(std::span<const Index> row_indices) const {
  Matrix out(width_, static_cast<Index>(row_indices.size()));
  for (std::size_t j = 0; j < row_indices.size(); ++j) {
    const Index r = row_indices[j];
    if (r < 0 || r >= rows_) {
      throw ShapeError("BinaryDataset::gather_columns: index out of range");
    }
    for (Index c = 0; c < width_; ++c) {
      out(c, static_cast<Index>(j)) = bit(r, c) ? 1.0 : 0.0;
    }
  }
  return out;
}

Matrix BinaryDataset::to_matrix() const {
  Matrix out(width_, rows_);
  for (Index r = 0; r < rows_; ++r) {
    for (Index c = 0; c < width_; ++c) {
      out(c, r) = bit(r, c) ? 1.0 : 0.0;
    }
  }
  return out;
}

BinaryDataset BinaryDataset::slice(Index from, Index count,
                                   const std::string& split_label) const {
  if (from < 0 || count <= 0 || from + count > rows_) {
    throw ConfigError("BinaryDataset::slice: range [" + std::to_string(from) + ", " +
                      std::to_string(from + count) + ") outside " +
                      std::to_string(rows_) + " rows");
  }
  std::vector<std::uint8_t> packed(packed_.begin() + from * stride_,
                                   packed_.begin() + (from + count) * stride_);
  Provenance prov = prov_;
  prov.split = split_label;
  return BinaryDataset(count, width_, std::move(packed), std::move(prov));
}

namespace {

std::uint32_t read_be_u32(std::istream& in, std::size_t& offset,
                          const std::string& path) {
  std::uint8_t buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (in.gcount() != 4) {
    throw FormatError(path + ": truncated at offset " + std::to_string(offset));
  }
  offset += 4;
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

BinaryDataset load_idx_and_binarize(const std::string& path, BinarizeRule rule,
                                    std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(path + ": cannot open");
  }
  std::size_t offset = 0;
  const std::uint32_t magic = read_be_u32(in, offset, path);
  if (magic != 0x00000803u) {
    std::ostringstream msg;
    msg << path << ": bad IDX image magic 0x" << std::hex << magic << " at offset 0";
    throw FormatError(msg.str());
  }
  const std::uint32_t n = read_be_u32(in, offset, path);
  const std::uint32_t h = read_be_u32(in, offset, path);
  const std::uint32_t w = read_be_u32(in, offset, path);
  if (n == 0 || h == 0 || w == 0) {
    throw FormatError(path + ": zero dimension in IDX header");
  }
  const std::size_t pixels = std::size_t(n) * h * w;
  std::vector<std::uint8_t> raw(pixels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(pixels));
  if (static_cast<std::size_t>(in.gcount()) != pixels) {
    throw FormatError(path + ": truncated at offset " +
                      std::to_string(offset + static_cast<std::size_t>(in.gcount())));
  }

  const Index width = static_cast<Index>(h) * static_cast<Index>(w);
  const std::size_t stride = (static_cast<std::size_t>(width) + 7) / 8;
  std::vector<std::uint8_t> packed(std::size_t(n) * stride, 0);
  Rng rng(seed);
  for (std::size_t r = 0; r < n; ++r) {
    for (Index c = 0; c < width; ++c) {
      const double level = raw[r * static_cast<std::size_t>(width) +
                               static_cast<std::size_t>(c)] /
                           255.0;
      const bool bit = rule == BinarizeRule::Threshold ? level > 0.5
                                                       : rng.bernoulli(level);
      if (bit) {
        packed[r * stride + (static_cast<std::size_t>(c) >> 3)] |=
            static_cast<std::uint8_t>(1u << (c & 7));
      }
    }
  }

  Provenance prov;
  prov.source = path;
  prov.rule = rule == BinarizeRule::Threshold
                  ? "threshold(pixel/255>0.5)"
                  : "stochastic(bernoulli(pixel/255),seed=" + std::to_string(seed) + ")";
  prov.split = "all";
  return BinaryDataset(static_cast<Index>(n), width, std::move(packed),
                       std::move(prov));
}

BinaryDataset load_amat(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError(path + ": cannot open");
  }
  std::vector<std::vector<std::uint8_t>> rows;
  std::string line;
  std::size_t line_no = 0;
  Index width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::vector<std::uint8_t> row;
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      if (tok == "0") {
        row.push_back(0);
      } else if (tok == "1") {
        row.push_back(1);
      } else {
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": non-binary token '" + tok + "'");
      }
    }
    if (row.empty()) {
      continue;  // blank line
    }
    if (width < 0) {
      width = static_cast<Index>(row.size());
    } else if (static_cast<Index>(row.size()) != width) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " tokens, got " +
                        std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw FormatError(path + ": no data rows");
  }
  Provenance prov;
  prov.source = path;
  prov.rule = "native-binary";
  prov.split = "all";
  return BinaryDataset::from_rows(rows, std::move(prov));
}

void save_amat(const BinaryDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError(path + ": cannot open for writing");
  }
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index c = 0; c < data.width(); ++c) {
      if (c) {
        out << ' ';
      }
      out << (data.bit(r, c) ? '1' : '0');
    }
    out << '\n';
  }
  if (!out) {
    throw FormatError(path + ": write failed");
  }
}

BinaryDataset synth_manifold(Index n, Index d_x, Index k, Rng& rng) {
  if (k >= d_x) {
    throw ConfigError("synth_manifold: need k < d_x");
  }
  if (d_x > 20) {
    throw ConfigError("synth_manifold: d_x must stay <= 20 for the exhaustive oracles");
  }
  if (n <= 0 || k <= 0) {
    throw ConfigError("synth_manifold: n and k must be positive");
  }

  // Fixed generator: k -> d_x tanh -> d_x threshold. Drawn once from the
  // caller's generator, so the map is deterministic per seed.
  Matrix w1(d_x, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < d_x; ++i) {
      w1(i, j) = rng.uniform(-2.0, 2.0);
    }
  }
  Vector b1(d_x);
  for (Index i = 0; i < d_x; ++i) {
    b1[i] = rng.uniform(-1.0, 1.0);
  }
  Matrix w2(d_x, d_x);
  for (Index j = 0; j < d_x; ++j) {
    for (Index i = 0; i < d_x; ++i) {
      w2(i, j) = rng.uniform(-2.0, 2.0);
    }
  }
  Vector b2(d_x);
  for (Index i = 0; i < d_x; ++i) {
    b2[i] = rng.uniform(-1.0, 1.0);
  }

  const std::size_t stride = (static_cast<std::size_t>(d_x) + 7) / 8;
  std::vector<std::uint8_t> packed(static_cast<std::size_t>(n) * stride, 0);
  Vector z(k);
  for (Index r = 0; r < n; ++r) {
    for (Index j = 0; j < k; ++j) {
      z[j] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    const Vector hidden = (w1 * z + b1).array().tanh();
    const Vector pre = w2 * hidden + b2;
    for (Index c = 0; c < d_x; ++c) {
      if (pre[c] > 0.0) {
        packed[static_cast<std::size_t>(r) * stride +
               (static_cast<std::size_t>(c) >> 3)] |=
            static_cast<std::uint8_t>(1u << (c & 7));
      }
    }
  }

  Provenance prov;
  prov.source = "synth_manifold(n=" + std::to_string(n) + ",d_x=" + std::to_string(d_x) +
                ",k=" + std::to_string(k) + ")";
  prov.rule = "generator-threshold";
  prov.split = "train";
  return BinaryDataset(n, d_x, std::move(packed), std::move(prov));
}

}  // namespace dga
