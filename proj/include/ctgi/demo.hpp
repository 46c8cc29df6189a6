#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ctgi/compressive.hpp"
#include "ctgi/image.hpp"
#include "ctgi/metrics.hpp"
#include "ctgi/parallel.hpp"

namespace ctgi::demo {

/// Procedural scenes, quantized to 8-bit levels (v / 255). The seed only
/// perturbs start positions; equal arguments give identical videos.

/// A bright square orbiting the centre on a dim textured background.
Video moving_square_scene(std::size_t side, std::size_t frames, std::uint64_t seed = 1);
/// A shaded disk dropping under constant acceleration on a dark background.
Video falling_disk_scene(std::size_t side, std::size_t frames, std::uint64_t seed = 1);
/// A triangle, a block-letter glyph and a shaded disk falling side by side in
/// front of a constant gray background.
Video falling_objects_scene(std::size_t side, std::size_t frames, std::uint64_t seed = 1);

/// Mean over every l x l window; output side is side - l + 1.
Image window_mean(const Image& image, std::size_t l);

struct DemoConfig {
  double scale = 0.25;  ///< 1.0 is the full 128 x 128 scene with 8 x 8 super-pixels
  std::uint64_t seed = 1;
  Parallelism par;
};

struct HadamardDemoResult {
  SuperPixelGeometry geometry{1, 1, 1};
  std::size_t frames = 0;
  MetricsReport metrics;
  double max_relative_error = 0.0;
};

/// Walsh-Hadamard modulation of a block-uniform scene, correlation retrieval.
HadamardDemoResult run_hadamard_demo(const DemoConfig& config);

struct RatePoint {
  SamplingPlan plan;
  SuperPixelGeometry geometry{1, 1, 1};
  MetricsReport metrics;
};

/// Random binary bases with K = 64 and l = 4, 5, 6, 7, solved with temporal TV.
/// The scene is noise-free, so the weight is kept small: 1e-3 ||Phi^T y||_inf.
std::vector<RatePoint> run_compressive_demo(const DemoConfig& config,
                                            const SolverOptions& opts = {},
                                            const Regularization& reg = {std::nullopt, 1e-3});

struct SlidingDemoResult {
  SuperPixelGeometry geometry{1, 1, 1};
  std::size_t frames = 0;
  std::size_t output_side = 0;
  double tau = 0.0;
  MetricsReport raw;          ///< against the window-mean truth
  MetricsReport thresholded;  ///< same, after apply_threshold(tau)
};

/// Falling objects at full modulator resolution, sliding-window retrieval.
SlidingDemoResult run_sliding_demo(const DemoConfig& config, double tau = 0.2);

/// Scene side and super-pixel side for a scale; throws unless
/// 8 sqrt(scale) is a power of two and 128 scale rounds to >= 1.
SuperPixelGeometry hadamard_demo_geometry(double scale);

std::string format_summary(const HadamardDemoResult& result);
std::string format_summary(const std::vector<RatePoint>& sweep);
std::string format_summary(const SlidingDemoResult& result);

}  // namespace ctgi::demo
