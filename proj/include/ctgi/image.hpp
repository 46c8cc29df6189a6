#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ctgi {

/// Ties the modulator/camera side m to the super-pixel side l and the scene
/// side n (in super-pixels): m = l * n.
class SuperPixelGeometry {
 public:
  /// Throws std::invalid_argument unless m == l * n with l, n >= 1.
  SuperPixelGeometry(std::size_t m, std::size_t l, std::size_t n);

  static SuperPixelGeometry from_superpixels(std::size_t l, std::size_t n) {
    return SuperPixelGeometry(l * n, l, n);
  }

  std::size_t m() const noexcept { return m_; }
  std::size_t l() const noexcept { return l_; }
  std::size_t n() const noexcept { return n_; }

  friend bool operator==(const SuperPixelGeometry&,
                         const SuperPixelGeometry&) = default;

 private:
  std::size_t m_;
  std::size_t l_;
  std::size_t n_;
};

/// Dense row-major grayscale image of doubles.
class Image {
 public:
  Image() = default;
  Image(std::size_t rows, std::size_t cols, double fill = 0.0);
  Image(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Ordered stack of K equally sized frames. Frame k (1-based, as in the
/// documentation and in file names) is stored at index k - 1.
///
/// Construction checks equal dimensions and finiteness. Scene inputs must
/// additionally be nonnegative (see require_nonnegative); reconstructions may
/// undershoot below zero and are kept as-is.
class Video {
 public:
  Video() = default;
  explicit Video(std::vector<Image> frames);

  std::size_t frame_count() const noexcept { return frames_.size(); }
  std::size_t rows() const noexcept { return frames_.empty() ? 0 : frames_[0].rows(); }
  std::size_t cols() const noexcept { return frames_.empty() ? 0 : frames_[0].cols(); }
  bool empty() const noexcept { return frames_.empty(); }

  const Image& frame(std::size_t k) const { return frames_.at(k); }
  Image& frame(std::size_t k) { return frames_.at(k); }
  const std::vector<Image>& frames() const noexcept { return frames_; }

  /// Throws std::invalid_argument if any intensity is negative.
  void require_nonnegative() const;

  friend bool operator==(const Video&, const Video&) = default;

 private:
  std::vector<Image> frames_;
};

/// Per-frame summary used in reconstruction results.
struct FrameStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

std::vector<FrameStats> frame_stats(const Video& video);

}  // namespace ctgi
