#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ctgi/basis.hpp"
#include "ctgi/image.hpp"

namespace ctgi::io {

/// CRC-32 with the zlib/PNG polynomial.
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);

/// Binary PGM (P5). Values are normalized by maxval on decode; on encode they
/// are clamped to [0,1] and scaled to 255 (bits = 8) or 65535 (bits = 16),
/// 16-bit samples big-endian.
Image decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const Image& image, int bits = 8);

Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& image, int bits = 8);

/// "frame_0001.pgm" for k = 1. Frame numbers are 1-based.
std::string frame_filename(std::size_t k, const std::string& extension = ".pgm");

/// Reads frame_0001.pgm, frame_0002.pgm, ... until the first gap. When a
/// frame_XXXX.f32 sidecar of matching size exists it takes precedence.
Video read_frame_sequence(const std::filesystem::path& dir);

/// Writes one PGM per frame and, optionally, a raw little-endian float32
/// sidecar frame_XXXX.f32 (row-major, no header) with unclamped values.
void write_frame_sequence(const std::filesystem::path& dir, const Video& video,
                          int bits = 16, bool float_sidecar = true);

std::vector<std::uint8_t> encode_f32(const Image& image);
Image decode_f32(std::span<const std::uint8_t> bytes, std::size_t rows,
                 std::size_t cols);

/// CTGE exposure file. Little-endian layout:
///   "CTGE" | u16 version=1 | u32 m | m*m float32 row-major |
///   u32 CRC-32 of every preceding byte.
std::vector<std::uint8_t> serialize_exposure(const Image& exposure);
Image deserialize_exposure(std::span<const std::uint8_t> bytes);

inline constexpr std::size_t kExposureHeaderSize = 10;

void write_exposure(const std::filesystem::path& path, const Image& exposure);
Image read_exposure(const std::filesystem::path& path);

void write_basis(const std::filesystem::path& path, const ModulationBasis& basis);
ModulationBasis read_basis(const std::filesystem::path& path);

}  // namespace ctgi::io
