#include "stereocal/manifold.hpp"

#include <cmath>

#include "stereocal/errors.hpp"
#include "stereocal/geometry.hpp"

namespace stereocal {

Eigen::Vector3d projection(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  const double uu = u.dot(u);
  if (!(uu > 0.0) || !u.allFinite() || !v.allFinite()) {
    throw Error(errc::invalid_input, "projection: u must be nonzero and inputs finite");
  }
  return u * (u.dot(v) / uu);
}

TangentBasis finding_bases(const Eigen::Vector3d& t_hat) {
  if (!t_hat.allFinite() || !(t_hat.squaredNorm() > 0.0)) {
    throw Error(errc::invalid_input, "finding_bases: t_hat must be finite and nonzero");
  }

  // Dominant axis by strict comparison, first index wins ties.
  int idx = 0;
  if (std::abs(t_hat(1)) > std::abs(t_hat(idx))) idx = 1;
  if (std::abs(t_hat(2)) > std::abs(t_hat(idx))) idx = 2;

  Eigen::Vector3d b1, b2;
  if (idx == 0) {
    b1 = Eigen::Vector3d::UnitY();
    b2 = Eigen::Vector3d::UnitZ();
  } else if (idx == 1) {
    b1 = Eigen::Vector3d::UnitX();
    b2 = Eigen::Vector3d::UnitZ();
  } else {
    b1 = Eigen::Vector3d::UnitX();
    b2 = Eigen::Vector3d::UnitY();
  }

  b1 = b1 - projection(t_hat, b1);
  b1.normalize();
  b2 = b2 - projection(t_hat, b2) - projection(b1, b2);
  b2.normalize();
  return {b1, b2};
}

Eigen::Matrix3d exp_map(const Eigen::Vector3d& delta_theta) {
  if (!delta_theta.allFinite()) {
    throw Error(errc::invalid_input, "exp_map: input must be finite");
  }
  const Eigen::Matrix3d s = skew(delta_theta);
  const double theta2 = delta_theta.squaredNorm();
  if (theta2 < 1e-16) {
    return Eigen::Matrix3d::Identity() + s + 0.5 * (s * s);
  }
  const double theta = std::sqrt(theta2);
  return Eigen::Matrix3d::Identity() + (std::sin(theta) / theta) * s +
         ((1.0 - std::cos(theta)) / theta2) * (s * s);
}

ExtrinsicEstimate retract(const ExtrinsicEstimate& ext, const TangentBasis& basis,
                          const ErrorState& step) {
  ExtrinsicEstimate out;
  out.R = ext.R * exp_map(step.delta_theta);
  Eigen::Vector3d t = ext.t + step.alpha * basis.b1 + step.beta * basis.b2;
  const double norm = t.norm();
  if (norm < 1e-12) {
    throw Error(errc::step_too_large,
                "retract: translation step cancelled the direction vector");
  }
  out.t = t / norm;
  out.baseline_length = ext.baseline_length;
  return out;
}

}  // namespace stereocal
