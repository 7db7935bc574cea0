#pragma once

#include <Eigen/Core>

#include "stereocal/types.hpp"

namespace stereocal {

/// Orthonormal pair spanning the plane tangent to the unit sphere at the
/// translation direction that produced it.
struct TangentBasis {
  Eigen::Vector3d b1 = Eigen::Vector3d::UnitY();
  Eigen::Vector3d b2 = Eigen::Vector3d::UnitZ();
};

/// 5-DOF error state: rotation perturbation (radians) plus the two
/// displacements along the sphere tangent basis.
struct ErrorState {
  Eigen::Vector3d delta_theta = Eigen::Vector3d::Zero();
  double alpha = 0.0;
  double beta = 0.0;

  Vector5d to_vector() const {
    Vector5d v;
    v << delta_theta, alpha, beta;
    return v;
  }

  static ErrorState from_vector(const Vector5d& v) {
    return {v.head<3>(), v[3], v[4]};
  }

  double inf_norm() const { return to_vector().cwiseAbs().maxCoeff(); }
};

/// Component of v along u: u * <u,v> / <u,u>. Throws on zero u.
Eigen::Vector3d projection(const Eigen::Vector3d& u, const Eigen::Vector3d& v);

/// Deterministic orthonormal tangent basis at t_hat. Candidate axes exclude
/// the dominant component of t_hat so the Gram-Schmidt sweep stays
/// well-conditioned for every direction, including axis-aligned ones.
TangentBasis finding_bases(const Eigen::Vector3d& t_hat);

/// Rodrigues exponential map; exact identity at zero, Taylor fallback below
/// 1e-8 to avoid 0/0.
Eigen::Matrix3d exp_map(const Eigen::Vector3d& delta_theta);

/// Manifold update: R <- R * exp(delta_theta), t <- normalize(t + alpha*b1 +
/// beta*b2). The basis must have been built from ext.t.
ExtrinsicEstimate retract(const ExtrinsicEstimate& ext, const TangentBasis& basis,
                          const ErrorState& step);

}  // namespace stereocal
