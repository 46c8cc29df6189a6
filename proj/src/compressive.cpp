#include "ctgi/compressive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ctgi/error.hpp"

namespace ctgi {
namespace {

Eigen::MatrixXd measurement_matrix(const ModulationBasis& basis) {
  const std::size_t area = basis.geometry().l() * basis.geometry().l();
  Eigen::MatrixXd phi(area, basis.frame_count());
  for (std::size_t p = 0; p < area; ++p) {
    for (std::size_t k = 0; k < basis.frame_count(); ++k) phi(p, k) = basis.tile(k)[p];
  }
  return phi;
}

void check_exposure(const ExposureImage& exposure, const ModulationBasis& basis) {
  const SuperPixelGeometry& g = basis.geometry();
  if (!(exposure.geometry == g) || exposure.values.rows() != g.m() ||
      exposure.values.cols() != g.m()) {
    throw std::invalid_argument("exposure geometry does not match the basis");
  }
}

double spatial_tv_frame(const double* x, std::size_t stride, std::size_t n) {
  // x(i, j) = x[(i*n + j) * stride]
  auto at = [&](std::size_t i, std::size_t j) { return x[(i * n + j) * stride]; };
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dh = j + 1 < n ? at(i, j + 1) - at(i, j) : 0.0;
      const double dv = i + 1 < n ? at(i + 1, j) - at(i, j) : 0.0;
      tv += std::sqrt(dh * dh + dv * dv);
    }
  }
  return tv;
}

// Fast gradient projection on the dual of
//   min_u 1/2 ||u - b||^2 + mu * sum sqrt(Dh u^2 + Dv u^2)
// over an n x n image. `dual` holds (p, q) per pixel and is warm-started.
void tv2d_prox(std::span<const double> b, std::span<double> out, double mu, std::size_t n,
               std::span<double> dual, std::size_t iters) {
  const std::size_t size = n * n;
  if (mu <= 0.0 || n < 2) {
    std::copy(b.begin(), b.end(), out.begin());
    return;
  }
  std::vector<double> prev(dual.begin(), dual.end());
  std::vector<double> probe(dual.begin(), dual.end());
  std::vector<double> u(size);

  // u = b - mu * G^T w
  auto primal = [&](const std::vector<double>& w, std::span<double> dst) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double div = 0.0;
        const std::size_t px = i * n + j;
        if (j > 0) div += w[2 * (px - 1)];
        if (j + 1 < n) div -= w[2 * px];
        if (i > 0) div += w[2 * (px - n) + 1];
        if (i + 1 < n) div -= w[2 * px + 1];
        dst[px] = b[px] - mu * div;
      }
    }
  };

  const double step = 1.0 / (8.0 * mu);
  double t = 1.0;
  std::vector<double> next(2 * size);
  for (std::size_t it = 0; it < iters; ++it) {
    primal(probe, u);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t px = i * n + j;
        const double dh = j + 1 < n ? u[px + 1] - u[px] : 0.0;
        const double dv = i + 1 < n ? u[px + n] - u[px] : 0.0;
        double p = probe[2 * px] + step * dh;
        double q = probe[2 * px + 1] + step * dv;
        const double norm = std::max(1.0, std::sqrt(p * p + q * q));
        next[2 * px] = p / norm;
        next[2 * px + 1] = q / norm;
      }
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t idx = 0; idx < next.size(); ++idx) {
      probe[idx] = next[idx] + beta * (next[idx] - prev[idx]);
    }
    prev.swap(next);
    t = t_next;
  }
  primal(prev, out);
  std::copy(prev.begin(), prev.end(), dual.begin());
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// TV(z) - TV(x), summed term by term so the result stays accurate when the
// two iterates are close (a difference of two large totals would not).
double tv_difference(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x, TvMode mode,
                     std::size_t n) {
  double diff = 0.0;
  if (mode == TvMode::temporal) {
    for (Eigen::Index p = 0; p < x.cols(); ++p) {
      for (Eigen::Index k = 0; k + 1 < x.rows(); ++k) {
        diff += std::abs(z(k + 1, p) - z(k, p)) - std::abs(x(k + 1, p) - x(k, p));
      }
    }
    return diff;
  }
  auto grad_norm = [n](const Eigen::MatrixXd& u, Eigen::Index k, std::size_t i, std::size_t j) {
    auto at = [&](std::size_t a, std::size_t b) { return u(k, static_cast<Eigen::Index>(a * n + b)); };
    const double dh = j + 1 < n ? at(i, j + 1) - at(i, j) : 0.0;
    const double dv = i + 1 < n ? at(i + 1, j) - at(i, j) : 0.0;
    return std::sqrt(dh * dh + dv * dv);
  };
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) diff += grad_norm(z, k, i, j) - grad_norm(x, k, i, j);
    }
  }
  return diff;
}

}  // namespace

SamplingPlan plan_sampling(std::size_t frames, std::size_t side) {
  if (frames == 0 || side == 0) {
    throw std::invalid_argument("sampling plan needs K >= 1 and l >= 1");
  }
  SamplingPlan plan;
  plan.frames = frames;
  plan.side = side;
  plan.measurements = side * side;
  plan.sampling_rate = static_cast<double>(plan.measurements) / static_cast<double>(frames);
  plan.transfer_efficiency =
      static_cast<double>(frames) / static_cast<double>(plan.measurements);
  return plan;
}

void CsProblem::validate() const {
  if (phi.rows() == 0 || phi.cols() == 0) throw std::invalid_argument("empty measurement matrix");
  if (y.rows() != phi.rows() || y.cols() == 0) {
    throw std::invalid_argument("measurements do not match the measurement matrix");
  }
  if (!(phi.array() == 0.0 || phi.array() == 1.0).all()) {
    throw std::invalid_argument("measurement matrix entries must be 0 or 1");
  }
  if (!y.allFinite()) throw std::invalid_argument("measurements must be finite");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be finite and >= 0");
  }
  if (mode == TvMode::spatial &&
      static_cast<std::size_t>(y.cols()) != grid_side * grid_side) {
    throw std::invalid_argument("spatial TV needs one column per super-pixel of an n x n grid");
  }
}

void SolverOptions::validate() const {
  if (max_iters == 0) throw std::invalid_argument("max_iters must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("rel_tol must be in (0, 1)");
  if (!(step_scale > 0.0 && step_scale <= 1.0)) {
    throw std::invalid_argument("step_scale must be in (0, 1]");
  }
  if (prox_iters == 0) throw std::invalid_argument("prox_iters must be positive");
}

double default_lambda(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y, double relative) {
  const Eigen::MatrixXd corr = phi.transpose() * y;
  return corr.size() == 0 ? 0.0 : relative * corr.cwiseAbs().maxCoeff();
}

double Regularization::resolve(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y) const {
  return lambda ? *lambda : default_lambda(phi, y, relative);
}

void Regularization::validate() const {
  if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) {
    throw std::invalid_argument("lambda must be finite and >= 0");
  }
  if (!(relative >= 0.0) || !std::isfinite(relative)) {
    throw std::invalid_argument("relative lambda must be finite and >= 0");
  }
}

CsProblem build_problem(std::span<const double> window, const ModulationBasis& basis,
                        double lambda, TvMode mode) {
  const std::size_t area = basis.geometry().l() * basis.geometry().l();
  if (window.size() != area) {
    throw std::invalid_argument("window must hold l*l = " + std::to_string(area) + " values");
  }
  CsProblem problem;
  problem.phi = measurement_matrix(basis);
  problem.y = Eigen::Map<const Eigen::VectorXd>(window.data(), static_cast<Eigen::Index>(area));
  problem.lambda = lambda;
  problem.mode = mode;
  problem.grid_side = 1;
  problem.validate();
  return problem;
}

CsProblem build_frame_stack_problem(const ExposureImage& exposure,
                                    const ModulationBasis& basis, double lambda,
                                    TvMode mode) {
  check_exposure(exposure, basis);
  const std::size_t l = basis.geometry().l();
  const std::size_t n = basis.geometry().n();
  CsProblem problem;
  problem.phi = measurement_matrix(basis);
  problem.y.resize(static_cast<Eigen::Index>(l * l), static_cast<Eigen::Index>(n * n));
  for (std::size_t bi = 0; bi < n; ++bi) {
    for (std::size_t bj = 0; bj < n; ++bj) {
      for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
          problem.y(static_cast<Eigen::Index>(i * l + j), static_cast<Eigen::Index>(bi * n + bj)) =
              exposure.values(bi * l + i, bj * l + j);
        }
      }
    }
  }
  problem.lambda = lambda;
  problem.mode = mode;
  problem.grid_side = n;
  problem.validate();
  return problem;
}

double total_variation(const Eigen::MatrixXd& x, TvMode mode, std::size_t grid_side) {
  double tv = 0.0;
  if (mode == TvMode::temporal) {
    for (Eigen::Index p = 0; p < x.cols(); ++p) {
      for (Eigen::Index k = 0; k + 1 < x.rows(); ++k) tv += std::abs(x(k + 1, p) - x(k, p));
    }
    return tv;
  }
  if (static_cast<std::size_t>(x.cols()) != grid_side * grid_side) {
    throw std::invalid_argument("spatial TV needs one column per super-pixel of an n x n grid");
  }
  // Column-major storage: x(k, p) lives at data[p * rows + k].
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    tv += spatial_tv_frame(x.data() + k, static_cast<std::size_t>(x.rows()), grid_side);
  }
  return tv;
}

double tv_objective(const Eigen::MatrixXd& x, const CsProblem& problem) {
  if (x.rows() != problem.phi.cols() || x.cols() != problem.y.cols()) {
    throw std::invalid_argument("iterate dimensions do not match the problem");
  }
  const Eigen::MatrixXd residual = problem.y - problem.phi * x;
  const double data = 0.5 * residual.squaredNorm();
  if (problem.lambda == 0.0) return data;
  return data + problem.lambda * total_variation(x, problem.mode, problem.grid_side);
}

void tv1d_denoise(std::span<const double> input, std::span<double> output, double mu) {
  const std::size_t width = input.size();
  if (output.size() != width) throw std::invalid_argument("tv1d_denoise size mismatch");
  if (width == 0) return;
  if (mu <= 0.0) {
    std::copy(input.begin(), input.end(), output.begin());
    return;
  }
  // Condat's direct algorithm: grows the current segment while the running
  // dual stays within [-mu, mu], emitting segments as soon as it cannot.
  const double two_mu = 2.0 * mu;
  std::size_t k = 0, k0 = 0, kplus = 0, kminus = 0;
  double umin = mu, umax = -mu;
  double vmin = input[0] - mu, vmax = input[0] + mu;
  for (;;) {
    while (k == width - 1) {
      if (umin < 0.0) {
        do output[k0++] = vmin; while (k0 <= kminus);
        k = kminus = k0;
        vmin = input[k];
        umin = mu;
        umax = vmin + umin - vmax;
      } else if (umax > 0.0) {
        do output[k0++] = vmax; while (k0 <= kplus);
        k = kplus = k0;
        vmax = input[k];
        umax = -mu;
        umin = vmax + umax - vmin;
      } else {
        vmin += umin / static_cast<double>(k - k0 + 1);
        do output[k0++] = vmin; while (k0 <= k);
        return;
      }
    }
    if ((umin += input[k + 1] - vmin) < -mu) {
      do output[k0++] = vmin; while (k0 <= kminus);
      k = kminus = kplus = k0;
      vmin = input[k];
      vmax = vmin + two_mu;
      umin = mu;
      umax = -mu;
    } else if ((umax += input[k + 1] - vmax) > mu) {
      do output[k0++] = vmax; while (k0 <= kplus);
      k = kminus = kplus = k0;
      vmax = input[k];
      vmin = vmax - two_mu;
      umin = mu;
      umax = -mu;
    } else {
      ++k;
      if (umin >= mu) {
        kminus = k;
        vmin += (umin - mu) / static_cast<double>(kminus - k0 + 1);
        umin = mu;
      }
      if (umax <= -mu) {
        kplus = k;
        vmax += (umax + mu) / static_cast<double>(kplus - k0 + 1);
        umax = -mu;
      }
    }
  }
}

CsSolution solve_tv(const CsProblem& problem, const SolverOptions& opts) {
  problem.validate();
  opts.validate();
  const Eigen::MatrixXd& phi = problem.phi;
  const Eigen::MatrixXd& y = problem.y;
  const Eigen::Index frames = phi.cols();
  const Eigen::Index columns = y.cols();
  const std::size_t n = problem.grid_side;

  const Eigen::MatrixXd gram = phi.transpose() * phi;
  double lipschitz =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  if (!(lipschitz > 0.0)) lipschitz = 1.0;
  const double step = opts.step_scale / lipschitz;
  const double mu = problem.lambda * step;

  std::vector<double> dual;
  if (problem.mode == TvMode::spatial) dual.assign(static_cast<std::size_t>(frames) * 2 * n * n, 0.0);
  std::vector<double> row_in(n * n), row_out(n * n);

  auto prox = [&](const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
    out.resize(in.rows(), in.cols());
    if (mu == 0.0) {
      out = in;
      return;
    }
    if (problem.mode == TvMode::temporal) {
      for (Eigen::Index p = 0; p < in.cols(); ++p) {
        tv1d_denoise(std::span<const double>(in.col(p).data(), static_cast<std::size_t>(frames)),
                     std::span<double>(out.col(p).data(), static_cast<std::size_t>(frames)), mu);
      }
      return;
    }
    for (Eigen::Index k = 0; k < frames; ++k) {
      for (Eigen::Index p = 0; p < columns; ++p) row_in[static_cast<std::size_t>(p)] = in(k, p);
      tv2d_prox(row_in, row_out, mu, n,
                std::span<double>(dual).subspan(static_cast<std::size_t>(k) * 2 * n * n, 2 * n * n),
                opts.prox_iters);
      for (Eigen::Index p = 0; p < columns; ++p) out(k, p) = row_out[static_cast<std::size_t>(p)];
    }
  };

  CsSolution sol;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(frames, columns);
  Eigen::MatrixXd x_prev = x, v = x, z, grad, residual, residual_x, residual_z, step_image;
  residual_x = -y;  // Phi * 0 - y
  double f_x = tv_objective(x, problem);
  sol.objective.push_back(f_x);
  double t = 1.0;
  bool v_is_x = true;

  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    sol.iterations = it;
    residual.noalias() = phi * v;
    residual -= y;
    grad.noalias() = phi.transpose() * residual;
    prox(v - step * grad, z);
    if (!all_finite(z)) {
      throw SolverError("non-finite iterate at iteration " + std::to_string(it));
    }
    // f(z) - f(x) from ||a||^2 - ||b||^2 = (a - b).(a + b), with a - b = Phi (z - x)
    // formed directly. Accurate even when f(z) and f(x) agree to many digits.
    residual_z.noalias() = phi * z;
    residual_z -= y;
    step_image.noalias() = phi * (z - x);
    double delta = 0.5 * step_image.cwiseProduct(residual_z + residual_x).sum();
    if (problem.lambda != 0.0) {
      delta += problem.lambda * tv_difference(z, x, problem.mode, n);
    }
    if (!std::isfinite(delta) || !std::isfinite(f_x + delta)) {
      throw SolverError("non-finite objective at iteration " + std::to_string(it));
    }

    if (delta <= 0.0) {
      const double change = (z - x).norm();
      const double scale = x.norm();
      x_prev.swap(x);
      x = z;
      residual_x.swap(residual_z);
      f_x += delta;
      sol.objective.push_back(f_x);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      v = x + beta * (x - x_prev);
      v_is_x = beta == 0.0;
      t = t_next;
      if (change == 0.0 || change <= opts.rel_tol * scale) {
        sol.reason = Termination::converged;
        break;
      }
    } else {
      sol.objective.push_back(f_x);
      if (v_is_x) {
        sol.reason = Termination::no_descent;
        break;
      }
      // Momentum overshot: restart from the last accepted iterate.
      v = x;
      t = 1.0;
      v_is_x = true;
    }
  }
  sol.x = std::move(x);
  return sol;
}

ReconstructionResult reconstruct_cs(const ExposureImage& exposure,
                                    const ModulationBasis& basis, const Regularization& reg,
                                    TvMode mode, const SolverOptions& opts, Parallelism par) {
  check_exposure(exposure, basis);
  opts.validate();
  reg.validate();
  const std::size_t l = basis.geometry().l();
  const std::size_t n = basis.geometry().n();
  const std::size_t frames = basis.frame_count();
  std::vector<Image> out(frames, Image(n, n));
  ReconstructionResult result;
  result.mode = ReconstructionMode::compressive;

  if (mode == TvMode::spatial) {
    CsProblem problem = build_frame_stack_problem(exposure, basis, 0.0, TvMode::spatial);
    problem.lambda = reg.resolve(problem.phi, problem.y);
    const CsSolution sol = solve_tv(problem, opts);
    for (std::size_t k = 0; k < frames; ++k) {
      for (std::size_t p = 0; p < n * n; ++p) {
        out[k](p / n, p % n) = sol.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
      }
    }
    result.iterations = sol.iterations;
  } else {
    const Eigen::MatrixXd phi = measurement_matrix(basis);
    std::vector<std::size_t> row_iterations(n, 0);
    parallel_for(n, par, [&](std::size_t begin, std::size_t end) {
      CsProblem problem;
      problem.phi = phi;
      problem.mode = TvMode::temporal;
      problem.y.resize(static_cast<Eigen::Index>(l * l), 1);
      for (std::size_t bi = begin; bi < end; ++bi) {
        for (std::size_t bj = 0; bj < n; ++bj) {
          for (std::size_t i = 0; i < l; ++i) {
            for (std::size_t j = 0; j < l; ++j) {
              problem.y(static_cast<Eigen::Index>(i * l + j), 0) =
                  exposure.values(bi * l + i, bj * l + j);
            }
          }
          problem.lambda = reg.resolve(phi, problem.y);
          CsSolution sol;
          try {
            sol = solve_tv(problem, opts);
          } catch (const SolverError& e) {
            throw SolverError("super-pixel (" + std::to_string(bi) + ", " +
                              std::to_string(bj) + "): " + e.what());
          }
          for (std::size_t k = 0; k < frames; ++k) {
            out[k](bi, bj) = sol.x(static_cast<Eigen::Index>(k), 0);
          }
          row_iterations[bi] += sol.iterations;
        }
      }
    });
    for (std::size_t it : row_iterations) result.iterations += it;
  }
  result.video = Video(std::move(out));
  result.stats = frame_stats(result.video);
  return result;
}

}  // namespace ctgi
