#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dga/numerics.hpp"
#include "dga/rng.hpp"

namespace dga {

/// Where a dataset came from and how it was binarized.
struct Provenance {
  std::string source;
  std::string rule;
  std::string split;
};

/// Immutable table of fixed-width binary rows, bit-packed.
class BinaryDataset {
 public:
  BinaryDataset(Index rows, Index width, std::vector<std::uint8_t> packed,
                Provenance prov);

  /// Builds from 0/1 bytes, one inner vector per row (all the same length).
  static BinaryDataset from_rows(const std::vector<std::vector<std::uint8_t>>& rows,
                                 Provenance prov);

  Index rows() const { return rows_; }
  Index width() const { return width_; }
  const Provenance& provenance() const { return prov_; }

  bool bit(Index r, Index c) const {
    return (packed_[static_cast<std::size_t>(r) * stride_ +
                    (static_cast<std::size_t>(c) >> 3)] >>
            (c & 7)) &
           1;
  }

  Vector row(Index r) const;
  void row(Index r, Vector& out) const;

  /// Gathers the given rows as columns of a (width x n) matrix.
  Matrix gather_columns(std::span<const Index> row_indices) const;

  /// The whole table as a (width x rows) matrix of 0/1 doubles.
  Matrix to_matrix() const;

  /// Contiguous row range [from, from + count) as a new dataset.
  BinaryDataset slice(Index from, Index count, const std::string& split_label) const;

 private:
  Index rows_ = 0;
  Index width_ = 0;
  std::size_t stride_ = 0;  // bytes per row
  std::vector<std::uint8_t> packed_;
  Provenance prov_;
};

enum class BinarizeRule { Threshold, Stochastic };

/// Reads an IDX image file (big-endian magic 0x00000803) and binarizes each
/// pixel: Threshold maps pixel/255 > 0.5 to 1; Stochastic draws
/// Bernoulli(pixel/255) with the given seed. The rule lands in the
/// provenance tag. Throws FormatError with the byte offset on bad input.
BinaryDataset load_idx_and_binarize(const std::string& path, BinarizeRule rule,
                                    std::uint64_t seed = 0);

/// ASCII rows of space-separated 0/1 tokens; width inferred from the first
/// row. Throws FormatError with the line number on ragged or non-binary rows.
BinaryDataset load_amat(const std::string& path);

void save_amat(const BinaryDataset& data, const std::string& path);

/// Desk-scale synthetic data: k fair latent bits pushed through a fixed
/// random two-layer generator network and thresholded, so the support has at
/// most 2^k distinct patterns. Requires k < d_x <= 20.
BinaryDataset synth_manifold(Index n, Index d_x, Index k, Rng& rng);

}  // namespace dga
