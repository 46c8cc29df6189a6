#include "ctgi/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace ctgi {

void NoiseModel::validate() const {
  switch (kind) {
    case Kind::none:
      return;
    case Kind::gaussian:
      if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("gaussian noise needs a finite sigma >= 0");
      }
      return;
    case Kind::poisson:
      if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("poisson noise needs a finite scale > 0");
      }
      return;
  }
}

Video upsample_scene(const Video& video, const SuperPixelGeometry& geometry) {
  const std::size_t n = geometry.n();
  const std::size_t l = geometry.l();
  if (video.empty()) throw std::invalid_argument("cannot upsample an empty video");
  if (video.rows() != n || video.cols() != n) {
    throw std::invalid_argument("scene is " + std::to_string(video.rows()) + "x" +
                                std::to_string(video.cols()) + ", geometry expects " +
                                std::to_string(n) + "x" + std::to_string(n));
  }
  std::vector<Image> frames;
  frames.reserve(video.frame_count());
  for (const Image& src : video.frames()) {
    Image dst(geometry.m(), geometry.m());
    for (std::size_t i = 0; i < geometry.m(); ++i) {
      for (std::size_t j = 0; j < geometry.m(); ++j) dst(i, j) = src(i / l, j / l);
    }
    frames.push_back(std::move(dst));
  }
  return Video(std::move(frames));
}

ExposureImage modulate_accumulate(const Video& video, const ModulationBasis& basis,
                                  Parallelism par) {
  const SuperPixelGeometry& g = basis.geometry();
  const std::size_t frames = basis.frame_count();
  if (video.frame_count() != frames) {
    throw std::invalid_argument("scene has " + std::to_string(video.frame_count()) +
                                " frames, basis expects K=" + std::to_string(frames));
  }
  if (video.rows() != g.m() || video.cols() != g.m()) {
    throw std::invalid_argument("scene frames must be " + std::to_string(g.m()) + "x" +
                                std::to_string(g.m()) + " to match the modulator");
  }
  video.require_nonnegative();

  const std::size_t m = g.m();
  Image out(m, m);
  parallel_for(m, par, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < frames; ++k) {
          sum += static_cast<double>(basis.at(k, i, j)) * video.frame(k)(i, j);
        }
        out(i, j) = sum;
      }
    }
  });
  return ExposureImage{std::move(out), g, std::nullopt};
}

Image direct_capture(const Video& video) {
  if (video.empty()) throw std::invalid_argument("direct capture of an empty video");
  Image out(video.rows(), video.cols());
  auto acc = out.values();
  for (const Image& f : video.frames()) {
    const auto v = f.values();
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += v[p];
  }
  return out;
}

ExposureImage add_noise(const ExposureImage& exposure, const NoiseModel& model) {
  model.validate();
  ExposureImage out = exposure;
  out.noise = model;
  if (model.kind == NoiseModel::Kind::none) return out;
  if (model.kind == NoiseModel::Kind::gaussian && model.sigma == 0.0) return out;

  std::mt19937_64 gen(model.seed);
  auto values = out.values.values();
  if (model.kind == NoiseModel::Kind::gaussian) {
    // Box-Muller, one normal deviate per uniform pair.
    for (double& v : values) {
      const double u1 = (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
      const double u2 = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      const double z =
          std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      v = std::max(0.0, v + model.sigma * z);
    }
  } else {
    for (double& v : values) {
      const double mean = std::max(0.0, v) * model.scale;
      if (mean <= 0.0) {
        v = 0.0;
        continue;
      }
      std::poisson_distribution<long long> dist(mean);
      v = static_cast<double>(dist(gen)) / model.scale;
    }
  }
  return out;
}

}  // namespace ctgi
