#pragma once

#include <cstdint>
#include <optional>

#include "ctgi/basis.hpp"
#include "ctgi/image.hpp"
#include "ctgi/parallel.hpp"

namespace ctgi {

/// Camera readout noise applied to an accumulated exposure.
struct NoiseModel {
  enum class Kind { none, gaussian, poisson };

  Kind kind = Kind::none;
  double sigma = 0.0;  ///< gaussian standard deviation (>= 0)
  double scale = 1.0;  ///< poisson: counts per unit intensity (> 0)
  std::uint64_t seed = 0;

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma, std::uint64_t seed) {
    return {Kind::gaussian, sigma, 1.0, seed};
  }
  static NoiseModel poisson(double scale, std::uint64_t seed) {
    return {Kind::poisson, 0.0, scale, seed};
  }

  void validate() const;
  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

/// Single camera image S, the sum of all modulated sub-frames.
struct ExposureImage {
  Image values;
  SuperPixelGeometry geometry;
  std::optional<NoiseModel> noise;
};

/// Replicates every scene pixel of an n x n video into an l x l block.
Video upsample_scene(const Video& video, const SuperPixelGeometry& geometry);

/// S(i,j) = sum_k X_k(i,j) F_k(i,j), summed in ascending k.
ExposureImage modulate_accumulate(const Video& video, const ModulationBasis& basis,
                                  Parallelism par = {});

/// Unmodulated long exposure (the motion-blurred image).
Image direct_capture(const Video& video);

/// Gaussian noise uses Box-Muller on std::mt19937_64 draws, Poisson noise
/// draws Poisson(v * scale) / scale. Values are clamped at zero.
ExposureImage add_noise(const ExposureImage& exposure, const NoiseModel& model);

}  // namespace ctgi
