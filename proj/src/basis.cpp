#include "ctgi/basis.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "ctgi/error.hpp"
#include "ctgi/io.hpp"

namespace ctgi {
namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr std::uint16_t kBasisVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<T>(bytes[offset + i]) << (8 * i));
  }
  return value;
}

}  // namespace

HadamardMatrix::HadamardMatrix(std::size_t order, HadamardOrdering ordering,
                               std::vector<std::int8_t> entries)
    : order_(order), ordering_(ordering), entries_(std::move(entries)) {
  if (entries_.size() != order_ * order_) {
    throw std::invalid_argument("Hadamard entries do not form a square matrix");
  }
}

HadamardMatrix walsh_hadamard(std::size_t order, HadamardOrdering ordering) {
  if (!is_power_of_two(order)) {
    throw std::invalid_argument("Hadamard order must be a power of two, got " +
                                std::to_string(order));
  }
  std::vector<std::int8_t> h{1};
  for (std::size_t size = 1; size < order; size *= 2) {
    const std::size_t next = 2 * size;
    std::vector<std::int8_t> grown(next * next);
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t c = 0; c < size; ++c) {
        const std::int8_t v = h[r * size + c];
        grown[r * next + c] = v;
        grown[r * next + c + size] = v;
        grown[(r + size) * next + c] = v;
        grown[(r + size) * next + c + size] = static_cast<std::int8_t>(-v);
      }
    }
    h = std::move(grown);
  }
  if (ordering == HadamardOrdering::sequency) {
    // Sylvester rows have pairwise distinct sign-change counts 0..K-1.
    std::vector<std::int8_t> sorted(order * order);
    for (std::size_t r = 0; r < order; ++r) {
      const std::span<const std::int8_t> row(h.data() + r * order, order);
      const std::size_t target = sign_changes(row);
      std::copy(row.begin(), row.end(), sorted.begin() + target * order);
    }
    h = std::move(sorted);
  }
  return HadamardMatrix(order, ordering, std::move(h));
}

std::size_t sign_changes(std::span<const std::int8_t> row) {
  std::size_t changes = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] != row[i - 1]) ++changes;
  }
  return changes;
}

std::vector<std::uint8_t> binarize_row(std::span<const std::int8_t> row) {
  std::vector<std::uint8_t> out;
  out.reserve(row.size());
  for (std::int8_t v : row) {
    if (v != 1 && v != -1) {
      throw std::invalid_argument("binarize_row expects entries in {+1,-1}");
    }
    out.push_back(v > 0 ? 1 : 0);
  }
  return out;
}

ModulationBasis::ModulationBasis(BasisKind kind, HadamardOrdering ordering,
                                 SuperPixelGeometry geometry, std::vector<Tile> tiles,
                                 std::uint64_t seed)
    : kind_(kind), ordering_(ordering), geometry_(geometry), tiles_(std::move(tiles)),
      seed_(seed) {
  if (tiles_.empty()) throw std::invalid_argument("a basis needs at least one tile");
  const std::size_t area = geometry_.l() * geometry_.l();
  for (std::size_t k = 0; k < tiles_.size(); ++k) {
    if (tiles_[k].size() != area) {
      throw std::invalid_argument("tile " + std::to_string(k + 1) + " is not l x l");
    }
    for (std::uint8_t v : tiles_[k]) {
      if (v > 1) throw std::invalid_argument("tiles must be binary");
    }
  }
  if (kind_ == BasisKind::walsh_hadamard && tiles_.size() > area) {
    throw std::invalid_argument("a Walsh-Hadamard basis cannot have more than l^2 frames");
  }
}

Image ModulationBasis::pattern(std::size_t k) const {
  const std::size_t m = geometry_.m();
  Image out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out(i, j) = at(k, i, j);
  }
  return out;
}

std::vector<std::size_t> ModulationBasis::constant_tiles() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < tiles_.size(); ++k) {
    const Tile& t = tiles_[k];
    if (std::all_of(t.begin(), t.end(), [&](std::uint8_t v) { return v == t[0]; })) {
      out.push_back(k);
    }
  }
  return out;
}

ModulationBasis build_hadamard_basis(const SuperPixelGeometry& geometry,
                                     HadamardOrdering ordering,
                                     std::optional<std::size_t> frames) {
  const std::size_t area = geometry.l() * geometry.l();
  const std::size_t count = frames.value_or(area);
  if (count == 0) throw std::invalid_argument("frame count must be positive");
  if (count > area) {
    throw std::invalid_argument("Hadamard basis with K=" + std::to_string(count) +
                                " exceeds l^2=" + std::to_string(area));
  }
  if (!is_power_of_two(area)) {
    throw std::invalid_argument("Hadamard basis needs l^2 to be a power of two, l=" +
                                std::to_string(geometry.l()));
  }
  const HadamardMatrix h = walsh_hadamard(area, ordering);
  std::vector<Tile> tiles;
  tiles.reserve(count);
  for (std::size_t k = 0; k < count; ++k) tiles.push_back(binarize_row(h.row(k)));
  return ModulationBasis(BasisKind::walsh_hadamard, ordering, geometry, std::move(tiles));
}

ModulationBasis build_random_basis(const SuperPixelGeometry& geometry, std::size_t frames,
                                   std::uint64_t seed, double density) {
  if (!(density > 0.0 && density < 1.0)) {
    throw std::invalid_argument("density must lie strictly between 0 and 1");
  }
  if (frames == 0) throw std::invalid_argument("frame count must be positive");
  std::mt19937_64 gen(seed);
  const std::size_t area = geometry.l() * geometry.l();
  std::vector<Tile> tiles(frames, Tile(area));
  for (Tile& t : tiles) {
    for (auto& px : t) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      px = u < density ? 1 : 0;
    }
  }
  return ModulationBasis(BasisKind::random_binary, HadamardOrdering::natural, geometry,
                         std::move(tiles), seed);
}

std::vector<std::uint8_t> serialize_basis(const ModulationBasis& basis) {
  const std::size_t l = basis.geometry().l();
  const std::size_t tile_bytes = (l * l + 7) / 8;
  std::vector<std::uint8_t> out;
  out.reserve(kBasisHeaderSize + basis.frame_count() * tile_bytes + 4);
  for (char c : {'C', 'T', 'G', 'B'}) out.push_back(static_cast<std::uint8_t>(c));
  put_le<std::uint16_t>(out, kBasisVersion);
  out.push_back(static_cast<std::uint8_t>(basis.kind()));
  out.push_back(static_cast<std::uint8_t>(basis.ordering()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(basis.frame_count()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(basis.geometry().n()));
  put_le<std::uint64_t>(out, basis.seed());
  for (const Tile& t : basis.tiles()) {
    std::vector<std::uint8_t> packed(tile_bytes, 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i]) packed[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
    out.insert(out.end(), packed.begin(), packed.end());
  }
  put_le<std::uint32_t>(out, io::crc32(out));
  return out;
}

ModulationBasis deserialize_basis(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBasisHeaderSize + 4) throw FormatError("basis file truncated");
  if (!std::equal(bytes.begin(), bytes.begin() + 4, "CTGB")) {
    throw FormatError("not a basis file (bad magic)");
  }
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kBasisVersion) {
    throw FormatError("unsupported basis file version " + std::to_string(version));
  }
  const std::uint8_t kind = bytes[6];
  const std::uint8_t ordering = bytes[7];
  const std::uint32_t frames = get_le<std::uint32_t>(bytes, 8);
  const std::uint32_t l = get_le<std::uint32_t>(bytes, 12);
  const std::uint32_t n = get_le<std::uint32_t>(bytes, 16);
  const std::uint64_t seed = get_le<std::uint64_t>(bytes, 20);
  if (kind > 1 || ordering > 1) throw FormatError("unknown basis kind or ordering");
  if (frames == 0 || l == 0 || n == 0) throw FormatError("basis dimensions must be positive");

  const std::size_t tile_bytes = (static_cast<std::size_t>(l) * l + 7) / 8;
  const std::size_t expected = kBasisHeaderSize + std::size_t{frames} * tile_bytes + 4;
  if (bytes.size() < expected) throw FormatError("basis file truncated");
  if (bytes.size() > expected) throw FormatError("trailing bytes after basis checksum");
  const std::uint32_t stored = get_le<std::uint32_t>(bytes, expected - 4);
  if (stored != io::crc32(bytes.first(expected - 4))) {
    throw FormatError("basis file checksum mismatch");
  }

  std::vector<Tile> tiles(frames, Tile(std::size_t{l} * l));
  for (std::size_t k = 0; k < frames; ++k) {
    const auto packed = bytes.subspan(kBasisHeaderSize + k * tile_bytes, tile_bytes);
    for (std::size_t i = 0; i < tiles[k].size(); ++i) {
      tiles[k][i] = (packed[i / 8] >> (7 - i % 8)) & 1u;
    }
  }
  try {
    return ModulationBasis(static_cast<BasisKind>(kind),
                           static_cast<HadamardOrdering>(ordering),
                           SuperPixelGeometry::from_superpixels(l, n), std::move(tiles),
                           seed);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("inconsistent basis file: ") + e.what());
  }
}

}  // namespace ctgi
