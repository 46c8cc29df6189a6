#include "ctgi/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include <zlib.h>

#include "ctgi/error.hpp"

namespace fs = std::filesystem;

namespace ctgi::io {
namespace {

constexpr std::uint16_t kExposureVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return std::uint32_t{b[off]} | std::uint32_t{b[off + 1]} << 8 |
         std::uint32_t{b[off + 2]} << 16 | std::uint32_t{b[off + 3]} << 24;
}

void put_f32(std::vector<std::uint8_t>& out, double value) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
}

double get_f32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<double>(std::bit_cast<float>(get_u32(b, off)));
}

// Skips whitespace and '#' comments, then parses an unsigned decimal.
std::size_t pgm_number(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  for (;;) {
    if (pos >= bytes.size()) throw FormatError("PGM header truncated");
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t value = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    value = value * 10 + (bytes[pos] - '0');
    ++pos;
    ++digits;
  }
  if (digits == 0) throw FormatError("malformed PGM header");
  return value;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = ::crc32(crc, bytes.data() + offset, static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

Image decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM (P5) image");
  }
  std::size_t pos = 2;
  const std::size_t cols = pgm_number(bytes, pos);
  const std::size_t rows = pgm_number(bytes, pos);
  const std::size_t maxval = pgm_number(bytes, pos);
  if (maxval == 0 || maxval > 65535) throw FormatError("PGM maxval out of range");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("malformed PGM header");
  }
  ++pos;
  const std::size_t sample = maxval > 255 ? 2 : 1;
  if (bytes.size() - pos < rows * cols * sample) throw FormatError("PGM pixel data truncated");

  Image img(rows, cols);
  auto v = img.values();
  const double scale = static_cast<double>(maxval);
  for (std::size_t p = 0; p < v.size(); ++p) {
    const std::size_t raw = sample == 1 ? bytes[pos + p]
                                        : (std::size_t{bytes[pos + 2 * p]} << 8) |
                                              bytes[pos + 2 * p + 1];
    v[p] = static_cast<double>(raw) / scale;
  }
  return img;
}

std::vector<std::uint8_t> encode_pgm(const Image& image, int bits) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("PGM bit depth must be 8 or 16");
  const unsigned maxval = bits == 8 ? 255u : 65535u;
  const std::string header = "P5\n" + std::to_string(image.cols()) + " " +
                             std::to_string(image.rows()) + "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.size() * (bits / 8));
  for (double v : image.values()) {
    const double clamped = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(clamped * maxval));
    if (bits == 16) out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

Image read_pgm(const fs::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pgm(const fs::path& path, const Image& image, int bits) {
  write_file_atomic(path, encode_pgm(image, bits));
}

std::string frame_filename(std::size_t k, const std::string& extension) {
  std::string digits = std::to_string(k);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "frame_" + digits + extension;
}

Video read_frame_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<Image> frames;
  for (std::size_t k = 1;; ++k) {
    const fs::path pgm = dir / frame_filename(k);
    if (!fs::exists(pgm)) break;
    Image img = read_pgm(pgm);
    const fs::path sidecar = dir / frame_filename(k, ".f32");
    if (fs::exists(sidecar)) {
      const auto raw = read_file(sidecar);
      if (raw.size() == img.size() * 4) img = decode_f32(raw, img.rows(), img.cols());
    }
    frames.push_back(std::move(img));
  }
  if (frames.empty()) {
    throw Error("no frames found in " + dir.string() + " (expected " + frame_filename(1) + ")");
  }
  try {
    return Video(std::move(frames));
  } catch (const std::invalid_argument& e) {
    throw Error(dir.string() + ": " + e.what());
  }
}

void write_frame_sequence(const fs::path& dir, const Video& video, int bits,
                          bool float_sidecar) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < video.frame_count(); ++k) {
    write_pgm(dir / frame_filename(k + 1), video.frame(k), bits);
    if (float_sidecar) {
      write_file_atomic(dir / frame_filename(k + 1, ".f32"), encode_f32(video.frame(k)));
    }
  }
}

std::vector<std::uint8_t> encode_f32(const Image& image) {
  std::vector<std::uint8_t> out;
  out.reserve(image.size() * 4);
  for (double v : image.values()) put_f32(out, v);
  return out;
}

Image decode_f32(std::span<const std::uint8_t> bytes, std::size_t rows, std::size_t cols) {
  if (bytes.size() != rows * cols * 4) throw FormatError("float sidecar has the wrong size");
  Image img(rows, cols);
  auto v = img.values();
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = get_f32(bytes, 4 * p);
  return img;
}

std::vector<std::uint8_t> serialize_exposure(const Image& exposure) {
  if (exposure.rows() != exposure.cols()) throw std::invalid_argument("exposure must be square");
  std::vector<std::uint8_t> out;
  out.reserve(kExposureHeaderSize + exposure.size() * 4 + 4);
  for (char c : {'C', 'T', 'G', 'E'}) out.push_back(static_cast<std::uint8_t>(c));
  put_u16(out, kExposureVersion);
  put_u32(out, static_cast<std::uint32_t>(exposure.rows()));
  for (double v : exposure.values()) put_f32(out, v);
  put_u32(out, crc32(out));
  return out;
}

Image deserialize_exposure(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kExposureHeaderSize + 4) throw FormatError("exposure file truncated");
  if (!std::equal(bytes.begin(), bytes.begin() + 4, "CTGE")) {
    throw FormatError("not an exposure file (bad magic)");
  }
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | bytes[5] << 8);
  if (version != kExposureVersion) {
    throw FormatError("unsupported exposure file version " + std::to_string(version));
  }
  const std::size_t m = get_u32(bytes, 6);
  if (m > (1u << 16)) throw FormatError("exposure side is implausibly large");
  const std::size_t expected = kExposureHeaderSize + m * m * 4 + 4;
  if (bytes.size() < expected) throw FormatError("exposure file truncated");
  if (bytes.size() > expected) throw FormatError("trailing bytes after exposure checksum");
  if (get_u32(bytes, expected - 4) != crc32(bytes.first(expected - 4))) {
    throw FormatError("exposure file checksum mismatch");
  }
  Image img(m, m);
  auto v = img.values();
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = get_f32(bytes, kExposureHeaderSize + 4 * p);
  return img;
}

void write_exposure(const fs::path& path, const Image& exposure) {
  write_file_atomic(path, serialize_exposure(exposure));
}

Image read_exposure(const fs::path& path) {
  try {
    return deserialize_exposure(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_basis(const fs::path& path, const ModulationBasis& basis) {
  write_file_atomic(path, serialize_basis(basis));
}

ModulationBasis read_basis(const fs::path& path) {
  try {
    return deserialize_basis(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ctgi::io
