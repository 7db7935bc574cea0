#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "stereocal/covariance.hpp"
#include "stereocal/manifold.hpp"
#include "stereocal/types.hpp"

namespace stereocal {

/// One weighted residual row of the epipolar least-squares problem.
struct ResidualRow {
  double r = 0.0;                    // signed epipolar residual
  Vector5d J = Vector5d::Zero();     // d r / d (delta_theta, alpha, beta)
  double w = 1.0;                    // combined weight w_n * w_h
};

struct OptimizerConfig {
  double huber_threshold_px = 1.0;
  int max_iterations = 50;
  double step_tolerance = 1e-10;
  int min_matches = 10;
  double damping = 0.0;
  // Pixels per normalized unit, used to convert the Huber threshold and to
  // report pixel-unit RMS. Callers derive it from the intrinsics.
  double pixel_scale = 1.0;

  double huber_threshold_normalized() const {
    return huber_threshold_px / pixel_scale;
  }

  void validate() const;
};

/// min(fx, fy) over both cameras: the conservative pixel/normalized scale.
double pixel_scale_for(const CameraIntrinsics& left, const CameraIntrinsics& right);

/// Snapshot after each accepted Gauss-Newton step. cost is the weighted sum
/// of squared residuals evaluated at this estimate.
struct IterationRecord {
  ExtrinsicEstimate estimate;
  double step_inf_norm = 0.0;
  double cost = 0.0;
};

struct OptimizationResult {
  ExtrinsicEstimate estimate;
  int iterations = 0;
  bool converged = false;
  double final_rms_normalized = 0.0;
  double final_rms_px = 0.0;
  Matrix5d normal_matrix = Matrix5d::Zero();        // J^T W J at the final estimate
  Matrix5d huber_normal_matrix = Matrix5d::Zero();  // J^T W_h J (Huber weights only)
  double initial_cost = 0.0;                        // weighted cost at the prior
  std::vector<IterationRecord> trace;
};

/// Residual r = f'^T skew(t) R f and its analytic Jacobian:
///   d r / d delta_theta = -f'^T skew(t) R skew(f)
///   d r / d alpha       =  f'^T skew(b1) R f
///   d r / d beta        =  f'^T skew(b2) R f
/// The basis must have been built from ext.t.
ResidualRow residual_and_jacobian(const ExtrinsicEstimate& ext, const TangentBasis& basis,
                                  const NormalizedMatch& m);

/// Huber weight: 1 for |r| <= c_t, else c_t / |r|.
double huber_weight(double r, double c_t);

/// Statistical whitening weight 1 / sqrt(cov(r) + 1e-12); brings residuals to
/// approximately unit variance. The epsilon floors the noiseless case.
double normalization_weight(const ExtrinsicEstimate& ext, const NormalizedMatch& m,
                            const NoiseModel& noise);

/// Accumulated weighted normal equations plus per-iteration statistics.
struct NormalEquations {
  Matrix5d JtWJ = Matrix5d::Zero();
  Vector5d JtWr = Vector5d::Zero();
  Matrix5d JtWhJ = Matrix5d::Zero();  // Huber-only weights, kept for the fast covariance
  double cost = 0.0;                  // sum of w * r^2
  double rms_normalized = 0.0;        // unweighted RMS of r
  double rms_px = 0.0;                // RMS point-to-line distance, pixel units
  std::size_t count = 0;
};

/// Builds the weighted normal equations. Rows are combined in a canonical
/// order independent of the input permutation, so the result is bit-exact
/// reproducible for any ordering of the same multiset of matches.
NormalEquations assemble(const ExtrinsicEstimate& ext, const TangentBasis& basis,
                         std::span<const NormalizedMatch> matches,
                         const OptimizerConfig& cfg, const NoiseModel& noise);

/// Solves (JtWJ + damping I) step = -JtWr by Cholesky, escalating the damping
/// (x10 up to 1e-3) if the factorization fails. Throws
/// errc::degenerate_geometry when it still fails at the cap.
ErrorState solve_step(const Matrix5d& JtWJ, const Vector5d& JtWr, double damping);

/// Iterative reweighted Gauss-Newton on SO(3) x S^2: rebuild the tangent
/// basis, assemble, solve and retract until the step max-norm drops below
/// cfg.step_tolerance or the iteration cap is hit.
OptimizationResult optimize(const ExtrinsicEstimate& prior,
                            std::span<const NormalizedMatch> matches,
                            const OptimizerConfig& cfg, const NoiseModel& noise);

}  // namespace stereocal
