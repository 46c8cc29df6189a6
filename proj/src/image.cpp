#include "ctgi/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctgi {

SuperPixelGeometry::SuperPixelGeometry(std::size_t m, std::size_t l, std::size_t n)
    : m_(m), l_(l), n_(n) {
  if (l == 0 || n == 0) {
    throw std::invalid_argument("super-pixel geometry needs l >= 1 and n >= 1");
  }
  if (m != l * n) {
    throw std::invalid_argument("super-pixel geometry requires m = l*n, got m=" +
                                std::to_string(m) + " l=" + std::to_string(l) +
                                " n=" + std::to_string(n));
  }
}

Image::Image(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Image::Image(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("image data size does not match " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Video::Video(std::vector<Image> frames) : frames_(std::move(frames)) {
  for (std::size_t k = 0; k < frames_.size(); ++k) {
    if (!frames_[k].same_shape(frames_[0])) {
      throw std::invalid_argument("frame " + std::to_string(k + 1) +
                                  " differs in size from frame 1");
    }
    for (double v : frames_[k].values()) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("frame " + std::to_string(k + 1) +
                                    " contains a non-finite value");
      }
    }
  }
}

void Video::require_nonnegative() const {
  for (std::size_t k = 0; k < frames_.size(); ++k) {
    const auto v = frames_[k].values();
    if (std::any_of(v.begin(), v.end(), [](double x) { return x < 0.0; })) {
      throw std::invalid_argument("frame " + std::to_string(k + 1) +
                                  " contains a negative intensity");
    }
  }
}

std::vector<FrameStats> frame_stats(const Video& video) {
  std::vector<FrameStats> stats;
  stats.reserve(video.frame_count());
  for (const Image& f : video.frames()) {
    FrameStats s;
    const auto v = f.values();
    if (!v.empty()) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      s.min = *lo;
      s.max = *hi;
      double sum = 0.0;
      for (double x : v) sum += x;
      s.mean = sum / static_cast<double>(v.size());
    }
    stats.push_back(s);
  }
  return stats;
}

}  // namespace ctgi
