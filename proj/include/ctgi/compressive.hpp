#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ctgi/basis.hpp"
#include "ctgi/correlation.hpp"
#include "ctgi/parallel.hpp"
#include "ctgi/scene.hpp"

namespace ctgi {

/// Spatial-to-temporal bookkeeping for K frames on l x l super-pixels.
/// Both ratios are also kept as exact integer fractions.
struct SamplingPlan {
  std::size_t frames = 0;           ///< K
  std::size_t side = 0;             ///< l
  std::size_t measurements = 0;     ///< l^2
  double sampling_rate = 0.0;       ///< l^2 / K
  double transfer_efficiency = 0.0; ///< K / l^2
};

SamplingPlan plan_sampling(std::size_t frames, std::size_t side);

enum class TvMode {
  temporal,  ///< per super-pixel, TV(x) = sum_k |x_{k+1} - x_k|
  spatial,   ///< per frame, isotropic TV over the n x n grid of super-pixels
};

/// min 1/2 ||Y - Phi X||_F^2 + lambda TV(X)
///
/// Phi is l^2 x K with entry (p, k) = tile_k at pixel p (row-major). Each
/// column of Y holds the l^2 exposure values of one super-pixel and the
/// matching column of X its K-frame trace. For spatial TV the columns are the
/// super-pixels of an n x n grid in row-major order.
struct CsProblem {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd y;
  double lambda = 0.0;
  TvMode mode = TvMode::temporal;
  std::size_t grid_side = 1;  ///< n, only used by spatial TV

  void validate() const;
};

struct SolverOptions {
  std::size_t max_iters = 2000;
  double rel_tol = 1e-8;     ///< stop when ||x+ - x|| <= rel_tol * ||x||
  double step_scale = 1.0;   ///< step = step_scale / ||Phi||_2^2, in (0, 1]
  std::size_t prox_iters = 60;  ///< inner iterations of the 2-D TV prox

  void validate() const;
};

enum class Termination { converged, max_iters, no_descent };

struct CsSolution {
  Eigen::MatrixXd x;
  std::vector<double> objective;  ///< value at x0 = 0, then one per iteration
  std::size_t iterations = 0;
  Termination reason = Termination::max_iters;
};

/// relative * ||Phi^T y||_inf, the data-scaled default weight.
double default_lambda(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                      double relative = 0.01);

/// Either a fixed lambda for every problem, or default_lambda with the given
/// relative factor evaluated per problem.
struct Regularization {
  std::optional<double> lambda;
  double relative = 0.01;

  double resolve(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y) const;
  void validate() const;
};

/// Single-window problem. window is l x l row-major.
CsProblem build_problem(std::span<const double> window, const ModulationBasis& basis,
                        double lambda, TvMode mode = TvMode::temporal);

/// One column per super-pixel of the exposure, row-major over the n x n grid.
CsProblem build_frame_stack_problem(const ExposureImage& exposure,
                                    const ModulationBasis& basis, double lambda,
                                    TvMode mode = TvMode::spatial);

/// Unsmoothed total variation of X (K x P) under the given mode.
double total_variation(const Eigen::MatrixXd& x, TvMode mode, std::size_t grid_side = 1);

double tv_objective(const Eigen::MatrixXd& x, const CsProblem& problem);

/// Exact prox of mu * sum |x_{k+1} - x_k| (direct 1-D TV denoising).
void tv1d_denoise(std::span<const double> input, std::span<double> output, double mu);

/// Monotone FISTA. The TV prox is exact in temporal mode and computed by a
/// warm-started fast dual projected gradient in spatial mode. Every accepted
/// iterate has objective no larger than its predecessor; a rejected step resets
/// the momentum, and a rejected plain step ends the run with no_descent.
/// Throws SolverError on non-finite values.
CsSolution solve_tv(const CsProblem& problem, const SolverOptions& opts = {});

/// Under-sampled reconstruction of an n x n x K video. Temporal mode solves
/// every super-pixel independently; spatial mode solves one joint problem.
ReconstructionResult reconstruct_cs(const ExposureImage& exposure,
                                    const ModulationBasis& basis,
                                    const Regularization& reg = {},
                                    TvMode mode = TvMode::temporal,
                                    const SolverOptions& opts = {},
                                    Parallelism par = {});

}  // namespace ctgi
