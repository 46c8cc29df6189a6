#include "ctgi/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "ctgi/error.hpp"

namespace ctgi {
namespace {

// Centered masks of every pattern as seen through one l x l window whose
// origin sits at (row_offset, col_offset) modulo l, in window row-major order.
struct WindowKernel {
  std::size_t area = 0;
  std::size_t frames = 0;
  std::vector<double> centered;  // frames x area
  std::vector<double> denom;
  std::vector<double> mean;
  std::vector<bool> constant;
  std::optional<std::size_t> dc;
};

// Resolves which constant tile (if any) the formula policy recovers.
std::optional<std::size_t> resolve_dc(const ModulationBasis& basis, DcPolicy policy) {
  const auto constants = basis.constant_tiles();
  if (policy == DcPolicy::zero || constants.empty()) return std::nullopt;
  if (constants.size() > 1) {
    throw DegeneratePatternError(
        constants[1], "pattern " + std::to_string(constants[1] + 1) +
                          " is spatially constant and pattern " +
                          std::to_string(constants[0] + 1) +
                          " already is; the DC formula can recover only one such frame");
  }
  if (basis.tile(constants[0])[0] == 0) {
    throw DegeneratePatternError(constants[0], "pattern " + std::to_string(constants[0] + 1) +
                                                   " is all-off; its frame is unobservable");
  }
  return constants[0];
}

WindowKernel make_kernel(const ModulationBasis& basis, std::size_t row_offset,
                         std::size_t col_offset, std::optional<std::size_t> dc) {
  const std::size_t l = basis.geometry().l();
  WindowKernel kern;
  kern.area = l * l;
  kern.frames = basis.frame_count();
  kern.centered.resize(kern.frames * kern.area);
  kern.denom.resize(kern.frames);
  kern.mean.resize(kern.frames);
  kern.constant.resize(kern.frames);
  kern.dc = dc;
  const auto constants = basis.constant_tiles();
  for (std::size_t k : constants) kern.constant[k] = true;

  std::vector<double> mask(kern.area);
  for (std::size_t k = 0; k < kern.frames; ++k) {
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < l; ++j) {
        mask[i * l + j] = basis.tile(k)[((row_offset + i) % l) * l + (col_offset + j) % l];
      }
    }
    double sum = 0.0;
    for (double v : mask) sum += v;
    const double mu = sum / static_cast<double>(kern.area);
    double den = 0.0;
    for (std::size_t p = 0; p < kern.area; ++p) {
      const double c = mask[p] - mu;
      kern.centered[k * kern.area + p] = c;
      den += c * c;
    }
    kern.mean[k] = mu;
    kern.denom[k] = den;
  }
  return kern;
}

double dc_from_mean(const WindowKernel& kern, double window_mean,
                    std::span<const double> trace) {
  const std::size_t dc = *kern.dc;
  double rest = 0.0;
  for (std::size_t k = 0; k < kern.frames; ++k) {
    if (k != dc) rest += kern.mean[k] * trace[k];
  }
  return (window_mean - rest) / kern.mean[dc];
}

// `window` is l*l values in row-major window order; `scratch` has the same size.
void correlate(const WindowKernel& kern, std::span<const double> window,
               std::span<double> scratch, std::span<double> trace) {
  double sum = 0.0;
  for (double v : window) sum += v;
  const double mean = sum / static_cast<double>(kern.area);
  for (std::size_t p = 0; p < kern.area; ++p) scratch[p] = window[p] - mean;

  for (std::size_t k = 0; k < kern.frames; ++k) {
    if (kern.constant[k]) {
      trace[k] = 0.0;
      continue;
    }
    const double* c = kern.centered.data() + k * kern.area;
    double num = 0.0;
    for (std::size_t p = 0; p < kern.area; ++p) num += scratch[p] * c[p];
    trace[k] = num / kern.denom[k];
  }
  if (kern.dc) trace[*kern.dc] = dc_from_mean(kern, mean, trace);
}

void check_exposure(const ExposureImage& exposure, const ModulationBasis& basis) {
  const SuperPixelGeometry& g = basis.geometry();
  if (!(exposure.geometry == g) || exposure.values.rows() != g.m() ||
      exposure.values.cols() != g.m()) {
    throw std::invalid_argument("exposure geometry does not match the basis (m=" +
                                std::to_string(g.m()) + ", l=" + std::to_string(g.l()) + ")");
  }
}

std::vector<Image> empty_frames(std::size_t count, std::size_t side) {
  return std::vector<Image>(count, Image(side, side));
}

void gather_window(const Image& src, std::size_t r, std::size_t c, std::size_t l,
                   std::span<double> out) {
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) out[i * l + j] = src(r + i, c + j);
  }
}

ReconstructionResult finish(std::vector<Image> frames, ReconstructionMode mode,
                            DcPolicy policy) {
  ReconstructionResult result;
  result.video = Video(std::move(frames));
  result.mode = mode;
  result.dc_policy = policy;
  result.stats = frame_stats(result.video);
  return result;
}

}  // namespace

TemporalTrace correlate_window(std::span<const double> window,
                               const ModulationBasis& basis, DcPolicy dc_policy) {
  const std::size_t l = basis.geometry().l();
  if (window.size() != l * l) {
    throw std::invalid_argument("window must hold l*l = " + std::to_string(l * l) +
                                " values");
  }
  const WindowKernel kern = make_kernel(basis, 0, 0, resolve_dc(basis, dc_policy));
  std::vector<double> scratch(kern.area);
  TemporalTrace trace(kern.frames);
  correlate(kern, window, scratch, trace);
  return trace;
}

double recover_dc_frame(std::span<const double> window, const ModulationBasis& basis,
                        std::span<const double> trace) {
  const std::size_t l = basis.geometry().l();
  if (window.size() != l * l || trace.size() != basis.frame_count()) {
    throw std::invalid_argument("window or trace size does not match the basis");
  }
  if (basis.constant_tiles().empty()) {
    throw std::invalid_argument("basis has no constant pattern to recover");
  }
  const WindowKernel kern = make_kernel(basis, 0, 0, resolve_dc(basis, DcPolicy::formula));
  double sum = 0.0;
  for (double v : window) sum += v;
  return dc_from_mean(kern, sum / static_cast<double>(kern.area), trace);
}

ReconstructionResult reconstruct_correlation(const ExposureImage& exposure,
                                             const ModulationBasis& basis,
                                             DcPolicy dc_policy, Parallelism par) {
  check_exposure(exposure, basis);
  const std::size_t l = basis.geometry().l();
  const std::size_t n = basis.geometry().n();
  const WindowKernel kern = make_kernel(basis, 0, 0, resolve_dc(basis, dc_policy));
  std::vector<Image> frames = empty_frames(kern.frames, n);

  parallel_for(n, par, [&](std::size_t begin, std::size_t end) {
    std::vector<double> window(kern.area), scratch(kern.area), trace(kern.frames);
    for (std::size_t bi = begin; bi < end; ++bi) {
      for (std::size_t bj = 0; bj < n; ++bj) {
        gather_window(exposure.values, bi * l, bj * l, l, window);
        correlate(kern, window, scratch, trace);
        for (std::size_t k = 0; k < kern.frames; ++k) frames[k](bi, bj) = trace[k];
      }
    }
  });
  return finish(std::move(frames), ReconstructionMode::correlation, dc_policy);
}

ReconstructionResult reconstruct_exact(const ExposureImage& exposure,
                                       const ModulationBasis& basis, Parallelism par) {
  check_exposure(exposure, basis);
  const std::size_t l = basis.geometry().l();
  const std::size_t n = basis.geometry().n();
  const std::size_t area = l * l;
  const std::size_t frames = basis.frame_count();

  Eigen::MatrixXd phi(area, frames);
  for (std::size_t p = 0; p < area; ++p) {
    for (std::size_t k = 0; k < frames; ++k) phi(p, k) = basis.tile(k)[p];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
  if (area < frames || static_cast<std::size_t>(qr.rank()) < frames) {
    throw RankDeficientError("measurement matrix has rank " + std::to_string(qr.rank()) +
                             " < K=" + std::to_string(frames) +
                             "; the system is under-determined, use compressive mode");
  }
  const Eigen::MatrixXd pinv = qr.solve(Eigen::MatrixXd::Identity(area, area));

  std::vector<Image> out = empty_frames(frames, n);
  std::vector<double> row_residual(n, 0.0);
  parallel_for(n, par, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(area), x(frames);
    for (std::size_t bi = begin; bi < end; ++bi) {
      for (std::size_t bj = 0; bj < n; ++bj) {
        gather_window(exposure.values, bi * l, bj * l, l, y);
        for (std::size_t k = 0; k < frames; ++k) {
          double acc = 0.0;
          for (std::size_t p = 0; p < area; ++p) acc += pinv(k, p) * y[p];
          x[k] = acc;
          out[k](bi, bj) = acc;
        }
        double res = 0.0;
        for (std::size_t p = 0; p < area; ++p) {
          double pred = 0.0;
          for (std::size_t k = 0; k < frames; ++k) pred += phi(p, k) * x[k];
          res += (pred - y[p]) * (pred - y[p]);
        }
        row_residual[bi] = std::max(row_residual[bi], std::sqrt(res));
      }
    }
  });
  ReconstructionResult result =
      finish(std::move(out), ReconstructionMode::exact, DcPolicy::formula);
  for (double r : row_residual) result.residual_norm = std::max(result.residual_norm, r);
  return result;
}

ReconstructionResult reconstruct_sliding(const ExposureImage& exposure,
                                         const ModulationBasis& basis, DcPolicy dc_policy,
                                         Parallelism par) {
  check_exposure(exposure, basis);
  const std::size_t l = basis.geometry().l();
  const std::size_t m = basis.geometry().m();
  if (basis.kind() != BasisKind::walsh_hadamard || basis.frame_count() != l * l) {
    throw std::invalid_argument(
        "sliding reconstruction needs a full Walsh-Hadamard basis (K = l^2) so that "
        "every l x l window is a complete basis; this basis is not");
  }
  const std::optional<std::size_t> dc = resolve_dc(basis, dc_policy);
  std::vector<WindowKernel> kernels;
  kernels.reserve(l * l);
  for (std::size_t dr = 0; dr < l; ++dr) {
    for (std::size_t dcol = 0; dcol < l; ++dcol) kernels.push_back(make_kernel(basis, dr, dcol, dc));
  }

  const std::size_t side = m - l + 1;
  const std::size_t frames = basis.frame_count();
  std::vector<Image> out = empty_frames(frames, side);
  parallel_for(side, par, [&](std::size_t begin, std::size_t end) {
    std::vector<double> window(l * l), scratch(l * l), trace(frames);
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        const WindowKernel& kern = kernels[(r % l) * l + c % l];
        gather_window(exposure.values, r, c, l, window);
        correlate(kern, window, scratch, trace);
        for (std::size_t k = 0; k < frames; ++k) out[k](r, c) = trace[k];
      }
    }
  });
  return finish(std::move(out), ReconstructionMode::sliding, dc_policy);
}

ReconstructionResult apply_threshold(ReconstructionResult result, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("threshold tau must lie in [0, 1]");
  }
  if (tau == 0.0) {
    result.threshold = tau;
    return result;
  }
  std::vector<Image> frames = result.video.frames();
  for (Image& f : frames) {
    auto v = f.values();
    if (v.empty()) continue;
    double peak = v[0];
    for (double x : v) peak = std::max(peak, x);
    const double cut = tau * peak;
    for (double& x : v) {
      if (x < cut) x = 0.0;
    }
  }
  result.video = Video(std::move(frames));
  result.stats = frame_stats(result.video);
  result.threshold = tau;
  return result;
}

}  // namespace ctgi
