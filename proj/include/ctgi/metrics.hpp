#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctgi/image.hpp"

namespace ctgi {

struct FrameMetrics {
  double psnr = 0.0;     ///< dB, +inf for identical frames
  double rmse = 0.0;
  double pearson = 0.0;  ///< in [-1, 1]
};

struct MetricsReport {
  std::vector<FrameMetrics> frames;
  double mean_psnr = 0.0;
  double mean_rmse = 0.0;
  double mean_pearson = 0.0;
  /// Wall-clock seconds per pipeline stage, in insertion order.
  std::vector<std::pair<std::string, double>> stage_seconds;
};

double rmse(const Image& a, const Image& b);

/// 20 log10(peak / rmse); +inf when rmse == 0.
double psnr_from_rmse(double rmse, double peak = 1.0);

/// Pearson correlation over all pixels. When either image has zero variance
/// the coefficient is undefined; 1 is reported for identical images, 0 otherwise.
double pearson(const Image& a, const Image& b);

/// Throws std::invalid_argument on frame-count or dimension mismatch.
MetricsReport compute_metrics(const Video& reconstruction, const Video& truth);

/// "inf", "-inf", "nan" or the shortest round-trip decimal form.
std::string format_number(double value);

/// Flat key=value text, one entry per line. Stage timings are included only
/// when include_timings is set so that reports stay byte-reproducible.
std::string format_metrics(const MetricsReport& report, bool include_timings = false);

}  // namespace ctgi
