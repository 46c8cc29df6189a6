#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ctgi/image.hpp"

namespace ctgi {

/// Row order of a Sylvester-constructed Hadamard matrix.
enum class HadamardOrdering : std::uint8_t {
  natural = 0,   ///< Sylvester recursion order
  sequency = 1,  ///< Walsh order: ascending number of sign changes
};

/// Square {+1,-1} matrix with H^T H = K I.
class HadamardMatrix {
 public:
  HadamardMatrix(std::size_t order, HadamardOrdering ordering,
                 std::vector<std::int8_t> entries);

  std::size_t order() const noexcept { return order_; }
  HadamardOrdering ordering() const noexcept { return ordering_; }
  std::int8_t operator()(std::size_t r, std::size_t c) const {
    return entries_[r * order_ + c];
  }
  std::span<const std::int8_t> row(std::size_t r) const {
    return std::span<const std::int8_t>(entries_).subspan(r * order_, order_);
  }

 private:
  std::size_t order_;
  HadamardOrdering ordering_;
  std::vector<std::int8_t> entries_;
};

/// Order must be a power of two (>= 1).
HadamardMatrix walsh_hadamard(std::size_t order,
                              HadamardOrdering ordering = HadamardOrdering::sequency);

std::size_t sign_changes(std::span<const std::int8_t> row);

/// Maps +1 -> 1 and -1 -> 0. Throws std::invalid_argument on other values.
std::vector<std::uint8_t> binarize_row(std::span<const std::int8_t> row);

enum class BasisKind : std::uint8_t {
  walsh_hadamard = 0,
  random_binary = 1,
};

/// l*l binary tile in row-major order.
using Tile = std::vector<std::uint8_t>;

/// K binary m x m modulation patterns. Pattern k is the n x n tiling of its
/// l x l tile, so only the tiles are stored:
///   pattern_k(i, j) = tile_k(i mod l, j mod l).
class ModulationBasis {
 public:
  ModulationBasis(BasisKind kind, HadamardOrdering ordering,
                  SuperPixelGeometry geometry, std::vector<Tile> tiles,
                  std::uint64_t seed = 0);

  BasisKind kind() const noexcept { return kind_; }
  HadamardOrdering ordering() const noexcept { return ordering_; }
  const SuperPixelGeometry& geometry() const noexcept { return geometry_; }
  std::size_t frame_count() const noexcept { return tiles_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  const Tile& tile(std::size_t k) const { return tiles_.at(k); }
  const std::vector<Tile>& tiles() const noexcept { return tiles_; }

  std::uint8_t at(std::size_t k, std::size_t i, std::size_t j) const {
    const std::size_t l = geometry_.l();
    return tiles_[k][(i % l) * l + (j % l)];
  }

  /// Materializes pattern k as an m x m image of 0.0 / 1.0.
  Image pattern(std::size_t k) const;

  /// Indices of spatially constant tiles (zero variance within a super-pixel).
  std::vector<std::size_t> constant_tiles() const;

  friend bool operator==(const ModulationBasis&, const ModulationBasis&) = default;

 private:
  BasisKind kind_;
  HadamardOrdering ordering_;
  SuperPixelGeometry geometry_;
  std::vector<Tile> tiles_;
  std::uint64_t seed_;
};

/// Rows of the l^2-order Hadamard matrix, binarized and reshaped row-major into
/// l x l tiles. frames defaults to l^2 (full sampling); fewer rows may be
/// requested, more are rejected.
ModulationBasis build_hadamard_basis(
    const SuperPixelGeometry& geometry,
    HadamardOrdering ordering = HadamardOrdering::sequency,
    std::optional<std::size_t> frames = std::nullopt);

/// K tiles of i.i.d. Bernoulli(density) pixels. Bits come from std::mt19937_64
/// seeded with `seed`; each draw x maps to the uniform u = (x >> 11) * 2^-53 and
/// the pixel is on iff u < density. Tiles are filled k-major, then row-major.
ModulationBasis build_random_basis(const SuperPixelGeometry& geometry,
                                   std::size_t frames, std::uint64_t seed,
                                   double density = 0.5);

/// CTGB basis file. Little-endian layout:
///   "CTGB" | u16 version=1 | u8 kind | u8 ordering | u32 K | u32 l | u32 n |
///   u64 seed | K tiles, ceil(l^2/8) bytes each, row-major, MSB first |
///   u32 CRC-32 (zlib polynomial) of every preceding byte.
std::vector<std::uint8_t> serialize_basis(const ModulationBasis& basis);

/// Throws FormatError on bad magic, version, truncation or checksum mismatch.
ModulationBasis deserialize_basis(std::span<const std::uint8_t> bytes);

inline constexpr std::size_t kBasisHeaderSize = 28;

}  // namespace ctgi
