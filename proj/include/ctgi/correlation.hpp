#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctgi/basis.hpp"
#include "ctgi/image.hpp"
#include "ctgi/parallel.hpp"
#include "ctgi/scene.hpp"

namespace ctgi {

/// What to do with spatially constant (DC) patterns, which the correlation
/// formula cannot see.
enum class DcPolicy {
  formula,  ///< recover from the window mean, see recover_dc_frame
  zero,     ///< leave the frame at zero
};

enum class ReconstructionMode { correlation, exact, sliding, compressive };

/// Recovered I_1..I_K of one super-pixel or window.
using TemporalTrace = std::vector<double>;

struct ReconstructionResult {
  Video video;
  ReconstructionMode mode = ReconstructionMode::correlation;
  DcPolicy dc_policy = DcPolicy::formula;
  std::vector<FrameStats> stats;
  double residual_norm = 0.0;   ///< exact mode: largest per-block ||Phi x - y||
  double threshold = 0.0;       ///< tau of the last apply_threshold, 0 if none
  std::size_t iterations = 0;   ///< compressive mode: total solver iterations
};

/// Per-super-pixel intensity correlation:
///   I_k = sum (S - <S>)(X_k - <X_k>) / sum (X_k - <X_k>)^2
/// with <.> the spatial mean over the l x l window. Output is n x n x K.
ReconstructionResult reconstruct_correlation(const ExposureImage& exposure,
                                             const ModulationBasis& basis,
                                             DcPolicy dc_policy = DcPolicy::formula,
                                             Parallelism par = {});

/// Correlation retrieval for a single window given in row-major order against
/// the basis tiles as they appear in that window.
TemporalTrace correlate_window(std::span<const double> window,
                               const ModulationBasis& basis,
                               DcPolicy dc_policy = DcPolicy::formula);

/// Recovers the frame of the single constant tile from the window mean:
///   I_dc = (<S> - sum_{k != dc} <X_k> I_k) / <X_dc>
/// which for binarized Hadamard tiles is <S> - (1/2) sum_{k != dc} I_k.
/// The entry of `trace` at the DC index is ignored.
double recover_dc_frame(std::span<const double> window, const ModulationBasis& basis,
                        std::span<const double> trace);

/// Least-squares inversion of the per-super-pixel system S = Phi I. Requires
/// l^2 >= K and rank(Phi) = K; throws RankDeficientError otherwise.
ReconstructionResult reconstruct_exact(const ExposureImage& exposure,
                                       const ModulationBasis& basis,
                                       Parallelism par = {});

/// Correlation retrieval on every l x l window of the exposure. Needs a full
/// Walsh-Hadamard basis (K = l^2); output frames are (m - l + 1) square.
ReconstructionResult reconstruct_sliding(const ExposureImage& exposure,
                                         const ModulationBasis& basis,
                                         DcPolicy dc_policy = DcPolicy::formula,
                                         Parallelism par = {});

/// Zeroes values below tau * (frame max), frame by frame. 0 <= tau <= 1.
ReconstructionResult apply_threshold(ReconstructionResult result, double tau);

}  // namespace ctgi
