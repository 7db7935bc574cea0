#pragma once

#include <Eigen/Core>

#include "stereocal/types.hpp"

namespace stereocal {

/// Gaussian noise on normalized bearings. The homogeneous component is
/// noiseless, so the third row/column of each covariance is zero.
struct NoiseModel {
  double sigma_px = 0.5;
  Eigen::Matrix3d sigma_f_left = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d sigma_f_right = Eigen::Matrix3d::Zero();

  /// Maps pixel noise into normalized coordinates per camera:
  /// diag((sigma/fx)^2, (sigma/fy)^2, 0).
  static NoiseModel from_pixel_noise(double sigma_px, const CameraIntrinsics& left,
                                     const CameraIntrinsics& right);

  void validate() const;
};

/// 5x5 covariance of the error state with its largest eigenvalue cached as
/// the convergence signal. lambda_max is +infinity when the information
/// matrix has an unobservable direction.
struct CalibrationCovariance {
  Matrix5d sigma_delta = Matrix5d::Zero();
  double lambda_max = 0.0;
  bool approximate = false;

  bool observable() const { return std::isfinite(lambda_max); }
};

/// First-order variance of the epipolar residual for one match:
/// cov(r) = f'^T E Sigma_f E^T f' + f^T E^T Sigma_f' E f.
/// The cross term in the perturbations is dropped (second order).
double residual_covariance(const EssentialMatrix& E_hat, const NormalizedMatch& m,
                           const NoiseModel& noise);

/// Sigma_Delta = (J^T Sigma_r^-1 J)^-1 with diagonal Sigma_r.
CalibrationCovariance full_covariance(const MatrixX5d& J,
                                      const Eigen::VectorXd& residual_covs);

/// Fast form Sigma' = c_r * (J^T W J)^-1, valid when all residual variances
/// are close to the common value c_r and W is order one.
CalibrationCovariance approx_covariance(const Matrix5d& JtWJ, double c_r);

/// True iff lambda_max < threshold. The unobservable sentinel never converges.
bool convergence_check(const CalibrationCovariance& cov, double threshold);

}  // namespace stereocal
