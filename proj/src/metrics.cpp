#include "ctgi/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ctgi/io.hpp"

namespace ctgi {

double rmse(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("rmse: image dimensions differ");
  if (a.empty()) return 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  double sum = 0.0;
  for (std::size_t p = 0; p < va.size(); ++p) {
    const double d = va[p] - vb[p];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(va.size()));
}

double psnr_from_rmse(double rmse, double peak) {
  if (rmse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / rmse);
}

double pearson(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("pearson: image dimensions differ");
  const auto va = a.values();
  const auto vb = b.values();
  if (va.empty()) return 1.0;
  const double count = static_cast<double>(va.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t p = 0; p < va.size(); ++p) {
    ma += va[p];
    mb += vb[p];
  }
  ma /= count;
  mb /= count;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t p = 0; p < va.size(); ++p) {
    const double da = va[p] - ma;
    const double db = vb[p] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return a == b ? 1.0 : 0.0;
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

MetricsReport compute_metrics(const Video& reconstruction, const Video& truth) {
  if (reconstruction.frame_count() != truth.frame_count()) {
    throw std::invalid_argument("frame counts differ: " +
                                std::to_string(reconstruction.frame_count()) + " vs " +
                                std::to_string(truth.frame_count()));
  }
  if (reconstruction.rows() != truth.rows() || reconstruction.cols() != truth.cols()) {
    throw std::invalid_argument(
        "frame dimensions differ: " + std::to_string(reconstruction.rows()) + "x" +
        std::to_string(reconstruction.cols()) + " vs " + std::to_string(truth.rows()) + "x" +
        std::to_string(truth.cols()));
  }
  MetricsReport report;
  for (std::size_t k = 0; k < truth.frame_count(); ++k) {
    FrameMetrics fm;
    fm.rmse = rmse(reconstruction.frame(k), truth.frame(k));
    fm.psnr = psnr_from_rmse(fm.rmse);
    fm.pearson = pearson(reconstruction.frame(k), truth.frame(k));
    report.mean_psnr += fm.psnr;
    report.mean_rmse += fm.rmse;
    report.mean_pearson += fm.pearson;
    report.frames.push_back(fm);
  }
  if (!report.frames.empty()) {
    const double count = static_cast<double>(report.frames.size());
    report.mean_psnr /= count;
    report.mean_rmse /= count;
    report.mean_pearson /= count;
  }
  return report;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_metrics(const MetricsReport& report, bool include_timings) {
  std::string out;
  auto line = [&](const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("frames", std::to_string(report.frames.size()));
  line("mean_psnr_db", format_number(report.mean_psnr));
  line("mean_rmse", format_number(report.mean_rmse));
  line("mean_pearson", format_number(report.mean_pearson));
  for (std::size_t k = 0; k < report.frames.size(); ++k) {
    const std::string prefix = io::frame_filename(k + 1, "");
    line(prefix + ".psnr_db", format_number(report.frames[k].psnr));
    line(prefix + ".rmse", format_number(report.frames[k].rmse));
    line(prefix + ".pearson", format_number(report.frames[k].pearson));
  }
  if (include_timings) {
    for (const auto& [stage, seconds] : report.stage_seconds) {
      line("seconds." + stage, format_number(seconds));
    }
  }
  return out;
}

}  // namespace ctgi
