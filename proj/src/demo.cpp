#include "ctgi/demo.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "ctgi/basis.hpp"
#include "ctgi/correlation.hpp"
#include "ctgi/scene.hpp"

namespace ctgi::demo {
namespace {

double quantize8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

// Uniform in [0, 1) from the top 53 bits of a mt19937_64 draw.
double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double time_fraction(std::size_t k, std::size_t frames) {
  return frames > 1 ? static_cast<double>(k) / static_cast<double>(frames - 1) : 0.0;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// 5 x 7 block glyph of the letter G.
constexpr std::array<const char*, 7> kGlyph = {
    ".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###.",
};

bool inside_triangle(double x, double y, double cx, double top, double half) {
  // Isosceles, apex up, height 2 * half.
  if (y < top || y > top + 2.0 * half) return false;
  const double spread = (y - top) / 2.0;
  return std::abs(x - cx) <= spread;
}

}  // namespace

Video moving_square_scene(std::size_t side, std::size_t frames, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double phase = 2.0 * std::numbers::pi * unit(gen);
  const double s = static_cast<double>(side);
  const double half = std::max(1.0, s / 8.0);
  const double radius = s / 4.0;
  std::vector<Image> out;
  out.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double angle = phase + 2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(std::max<std::size_t>(frames, 1));
    const double cx = s / 2.0 + radius * std::cos(angle);
    const double cy = s / 2.0 + radius * std::sin(angle);
    Image f(side, side);
    for (std::size_t i = 0; i < side; ++i) {
      for (std::size_t j = 0; j < side; ++j) {
        const double y = static_cast<double>(i) + 0.5;
        const double x = static_cast<double>(j) + 0.5;
        double v = 0.08 + 0.04 * static_cast<double>(((i / 4) + (j / 4)) % 2);
        if (std::abs(x - cx) <= half && std::abs(y - cy) <= half) {
          v = 0.55 + 0.4 * (y - (cy - half)) / (2.0 * half);
        }
        f(i, j) = quantize8(v);
      }
    }
    out.push_back(std::move(f));
  }
  return Video(std::move(out));
}

Video falling_disk_scene(std::size_t side, std::size_t frames, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double s = static_cast<double>(side);
  const double r = std::max(1.5, s / 6.0);
  const double cx = s / 2.0 + (unit(gen) - 0.5) * s / 8.0;
  const double y0 = r;
  const double drop = s - 2.0 * r;
  std::vector<Image> out;
  out.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = time_fraction(k, frames);
    const double cy = y0 + drop * t * t;
    Image f(side, side);
    for (std::size_t i = 0; i < side; ++i) {
      for (std::size_t j = 0; j < side; ++j) {
        const double dy = static_cast<double>(i) + 0.5 - cy;
        const double dx = static_cast<double>(j) + 0.5 - cx;
        const double d = std::sqrt(dx * dx + dy * dy);
        double v = 0.05;
        if (d <= r) v = 0.45 + 0.5 * (1.0 - d / r);
        f(i, j) = quantize8(v);
      }
    }
    out.push_back(std::move(f));
  }
  return Video(std::move(out));
}

Video falling_objects_scene(std::size_t side, std::size_t frames, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double s = static_cast<double>(side);
  const double size = s / 8.0;
  std::array<double, 3> start{};
  for (double& y : start) y = size * (0.25 + 0.5 * unit(gen));
  const double drop = s - 3.0 * size;
  const double glyph_cell = size * 2.0 / 7.0;
  std::vector<Image> out;
  out.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = time_fraction(k, frames);
    const double fall = drop * t * t;
    Image f(side, side, quantize8(0.3));
    for (std::size_t i = 0; i < side; ++i) {
      for (std::size_t j = 0; j < side; ++j) {
        const double y = static_cast<double>(i) + 0.5;
        const double x = static_cast<double>(j) + 0.5;
        if (inside_triangle(x, y, s / 6.0, start[0] + fall, size)) f(i, j) = 1.0;

        const double gx = (x - (s / 2.0 - 2.5 * glyph_cell)) / glyph_cell;
        const double gy = (y - (start[1] + fall)) / glyph_cell;
        if (gx >= 0.0 && gx < 5.0 && gy >= 0.0 && gy < 7.0 &&
            kGlyph[static_cast<std::size_t>(gy)][static_cast<std::size_t>(gx)] == '#') {
          f(i, j) = 1.0;
        }

        const double dx = x - 5.0 * s / 6.0;
        const double dy = y - (start[2] + fall + size);
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d <= size) f(i, j) = quantize8(0.5 + 0.45 * (1.0 - d / size));
      }
    }
    out.push_back(std::move(f));
  }
  return Video(std::move(out));
}

Image window_mean(const Image& image, std::size_t l) {
  if (l == 0 || l > image.rows() || l > image.cols()) {
    throw std::invalid_argument("window larger than the image");
  }
  const std::size_t rows = image.rows() - l + 1;
  const std::size_t cols = image.cols() - l + 1;
  Image out(rows, cols);
  const double inv = 1.0 / static_cast<double>(l * l);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) sum += image(r + i, c + j);
      }
      out(r, c) = sum * inv;
    }
  }
  return out;
}

SuperPixelGeometry hadamard_demo_geometry(double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw std::invalid_argument("scale must be in (0, 1]");
  const double lf = 8.0 * std::sqrt(scale);
  const auto l = static_cast<std::size_t>(std::llround(lf));
  if (l == 0 || std::abs(lf - static_cast<double>(l)) > 1e-9 || (l & (l - 1)) != 0) {
    throw std::invalid_argument("scale must make 8*sqrt(scale) a power of two "
                                "(e.g. 1, 0.25, 0.0625)");
  }
  const auto n = static_cast<std::size_t>(std::llround(128.0 * scale));
  return SuperPixelGeometry::from_superpixels(l, std::max<std::size_t>(n, 1));
}

HadamardDemoResult run_hadamard_demo(const DemoConfig& config) {
  HadamardDemoResult result;
  result.geometry = hadamard_demo_geometry(config.scale);
  const SuperPixelGeometry& g = result.geometry;
  result.frames = g.l() * g.l();
  Stopwatch clock;
  const Video scene = moving_square_scene(g.n(), result.frames, config.seed);
  const Video modulated = upsample_scene(scene, g);
  const ModulationBasis basis = build_hadamard_basis(g);
  const double t_setup = clock.lap();
  const ExposureImage exposure = modulate_accumulate(modulated, basis, config.par);
  const double t_sim = clock.lap();
  const ReconstructionResult recon = reconstruct_correlation(exposure, basis, DcPolicy::formula,
                                                             config.par);
  const double t_recon = clock.lap();

  result.metrics = compute_metrics(recon.video, scene);
  double peak = 0.0, worst = 0.0;
  for (std::size_t k = 0; k < result.frames; ++k) {
    const auto a = recon.video.frame(k).values();
    const auto b = scene.frame(k).values();
    for (std::size_t p = 0; p < a.size(); ++p) {
      peak = std::max(peak, std::abs(b[p]));
      worst = std::max(worst, std::abs(a[p] - b[p]));
    }
  }
  result.max_relative_error = peak > 0.0 ? worst / peak : worst;
  result.metrics.stage_seconds = {{"setup", t_setup}, {"simulate", t_sim}, {"reconstruct", t_recon}};
  return result;
}

std::vector<RatePoint> run_compressive_demo(const DemoConfig& config, const SolverOptions& opts,
                                            const Regularization& reg) {
  constexpr std::size_t kFrames = 64;
  if (!(config.scale > 0.0 && config.scale <= 1.0)) {
    throw std::invalid_argument("scale must be in (0, 1]");
  }
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(128.0 * config.scale)));
  const Video scene = falling_disk_scene(n, kFrames, config.seed);
  std::vector<RatePoint> sweep;
  for (std::size_t l = 4; l <= 7; ++l) {
    Stopwatch clock;
    RatePoint point;
    point.plan = plan_sampling(kFrames, l);
    point.geometry = SuperPixelGeometry::from_superpixels(l, n);
    const ModulationBasis basis = build_random_basis(point.geometry, kFrames, config.seed, 0.5);
    const ExposureImage exposure =
        modulate_accumulate(upsample_scene(scene, point.geometry), basis, config.par);
    const double t_sim = clock.lap();
    const ReconstructionResult recon =
        reconstruct_cs(exposure, basis, reg, TvMode::temporal, opts, config.par);
    const double t_recon = clock.lap();
    point.metrics = compute_metrics(recon.video, scene);
    point.metrics.stage_seconds = {{"simulate", t_sim}, {"reconstruct", t_recon}};
    sweep.push_back(std::move(point));
  }
  return sweep;
}

SlidingDemoResult run_sliding_demo(const DemoConfig& config, double tau) {
  SlidingDemoResult result;
  result.geometry = hadamard_demo_geometry(config.scale);
  result.tau = tau;
  const SuperPixelGeometry& g = result.geometry;
  result.frames = g.l() * g.l();
  Stopwatch clock;
  const Video scene = falling_objects_scene(g.m(), result.frames, config.seed);
  const ModulationBasis basis = build_hadamard_basis(g);
  const ExposureImage exposure = modulate_accumulate(scene, basis, config.par);
  const double t_sim = clock.lap();
  const ReconstructionResult recon =
      reconstruct_sliding(exposure, basis, DcPolicy::formula, config.par);
  const double t_recon = clock.lap();
  const ReconstructionResult cleaned = apply_threshold(recon, tau);
  result.output_side = recon.video.rows();

  std::vector<Image> truth;
  truth.reserve(result.frames);
  for (const Image& f : scene.frames()) truth.push_back(window_mean(f, g.l()));
  const Video truth_video(std::move(truth));
  result.raw = compute_metrics(recon.video, truth_video);
  result.thresholded = compute_metrics(cleaned.video, truth_video);
  result.raw.stage_seconds = {{"simulate", t_sim}, {"reconstruct", t_recon}};
  return result;
}

std::string format_summary(const HadamardDemoResult& r) {
  std::string out;
  out += "simulation=hadamard-correlation\n";
  out += "scene=" + std::to_string(r.geometry.n()) + "x" + std::to_string(r.geometry.n()) + "\n";
  out += "modulator=" + std::to_string(r.geometry.m()) + "x" + std::to_string(r.geometry.m()) + "\n";
  out += "superpixel=" + std::to_string(r.geometry.l()) + "\n";
  out += "frames=" + std::to_string(r.frames) + "\n";
  out += "max_relative_error=" + format_number(r.max_relative_error) + "\n";
  out += "mean_psnr_db=" + format_number(r.metrics.mean_psnr) + "\n";
  out += "mean_pearson=" + format_number(r.metrics.mean_pearson) + "\n";
  return out;
}

std::string format_summary(const std::vector<RatePoint>& sweep) {
  std::string out = "simulation=compressive-sweep\n";
  for (const RatePoint& p : sweep) {
    const std::string key = "l" + std::to_string(p.plan.side);
    out += key + ".sampling_rate=" + format_number(p.plan.sampling_rate) + "\n";
    out += key + ".transfer_efficiency=" + format_number(p.plan.transfer_efficiency) + "\n";
    out += key + ".modulator=" + std::to_string(p.geometry.m()) + "\n";
    out += key + ".mean_psnr_db=" + format_number(p.metrics.mean_psnr) + "\n";
    out += key + ".mean_pearson=" + format_number(p.metrics.mean_pearson) + "\n";
  }
  return out;
}

std::string format_summary(const SlidingDemoResult& r) {
  std::string out = "simulation=sliding-window\n";
  out += "modulator=" + std::to_string(r.geometry.m()) + "x" + std::to_string(r.geometry.m()) + "\n";
  out += "superpixel=" + std::to_string(r.geometry.l()) + "\n";
  out += "frames=" + std::to_string(r.frames) + "\n";
  out += "output_side=" + std::to_string(r.output_side) + "\n";
  out += "tau=" + format_number(r.tau) + "\n";
  out += "raw.mean_psnr_db=" + format_number(r.raw.mean_psnr) + "\n";
  out += "thresholded.mean_psnr_db=" + format_number(r.thresholded.mean_psnr) + "\n";
  return out;
}

}  // namespace ctgi::demo
