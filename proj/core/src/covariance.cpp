#include "stereocal/covariance.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "stereocal/errors.hpp"

namespace stereocal {

namespace {

// Relative floor below which an information eigenvalue counts as zero.
constexpr double kSingularRel = 1e-14;

void check_psd_bearing_cov(const Eigen::Matrix3d& s, const char* side) {
  if (!s.allFinite()) {
    throw Error(errc::invalid_input, std::string("noise model: non-finite covariance (") + side + ")");
  }
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(errc::invalid_input, std::string("noise model: covariance not symmetric (") + side + ")");
  }
  if (s.row(2).cwiseAbs().maxCoeff() != 0.0 || s.col(2).cwiseAbs().maxCoeff() != 0.0) {
    throw Error(errc::invalid_input,
                std::string("noise model: homogeneous component must be noiseless (") + side + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(s, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-15) {
    throw Error(errc::invalid_input,
                std::string("noise model: covariance not positive semidefinite (") + side + ")");
  }
}

// Shared inversion: covariance = scale * info^-1 with an eigenvalue-based
// singularity guard. Returns the unobservable sentinel when info has a
// direction with (relatively) zero information.
CalibrationCovariance invert_information(const Matrix5d& info, double scale, bool approximate) {
  if (!info.allFinite()) {
    throw Error(errc::invalid_input, "covariance: information matrix must be finite");
  }
  const Matrix5d sym = 0.5 * (info + info.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix5d> eig(sym);
  const Vector5d& lambda = eig.eigenvalues();  // ascending
  const Matrix5d& V = eig.eigenvectors();

  CalibrationCovariance out;
  out.approximate = approximate;

  const double lambda_max_info = lambda[4];
  if (!(lambda_max_info > 0.0) || lambda[0] <= lambda_max_info * kSingularRel) {
    // Unobservable direction: pseudo-inverse on the observable span, sentinel
    // eigenvalue so convergence_check can never pass.
    Vector5d inv = Vector5d::Zero();
    for (int i = 0; i < 5; ++i) {
      if (lambda[i] > lambda_max_info * kSingularRel && lambda[i] > 0.0) {
        inv[i] = scale / lambda[i];
      }
    }
    out.sigma_delta = V * inv.asDiagonal() * V.transpose();
    out.lambda_max = std::numeric_limits<double>::infinity();
    return out;
  }

  Vector5d inv;
  for (int i = 0; i < 5; ++i) inv[i] = scale / lambda[i];
  out.sigma_delta = V * inv.asDiagonal() * V.transpose();
  out.sigma_delta = 0.5 * (out.sigma_delta + out.sigma_delta.transpose()).eval();
  out.lambda_max = scale / lambda[0];
  return out;
}

}  // namespace

NoiseModel NoiseModel::from_pixel_noise(double sigma_px, const CameraIntrinsics& left,
                                        const CameraIntrinsics& right) {
  if (!(sigma_px >= 0.0) || !std::isfinite(sigma_px)) {
    throw Error(errc::invalid_input, "noise model: sigma_px must be non-negative");
  }
  left.validate();
  right.validate();
  NoiseModel n;
  n.sigma_px = sigma_px;
  n.sigma_f_left.diagonal() << (sigma_px / left.fx) * (sigma_px / left.fx),
      (sigma_px / left.fy) * (sigma_px / left.fy), 0.0;
  n.sigma_f_right.diagonal() << (sigma_px / right.fx) * (sigma_px / right.fx),
      (sigma_px / right.fy) * (sigma_px / right.fy), 0.0;
  return n;
}

void NoiseModel::validate() const {
  if (!(sigma_px >= 0.0) || !std::isfinite(sigma_px)) {
    throw Error(errc::invalid_input, "noise model: sigma_px must be non-negative");
  }
  check_psd_bearing_cov(sigma_f_left, "left");
  check_psd_bearing_cov(sigma_f_right, "right");
}

double residual_covariance(const EssentialMatrix& E_hat, const NormalizedMatch& m,
                           const NoiseModel& noise) {
  const Eigen::Vector3d Etfp = E_hat.E.transpose() * m.f_prime;
  const Eigen::Vector3d Ef = E_hat.E * m.f;
  return Etfp.dot(noise.sigma_f_left * Etfp) + Ef.dot(noise.sigma_f_right * Ef);
}

CalibrationCovariance full_covariance(const MatrixX5d& J,
                                      const Eigen::VectorXd& residual_covs) {
  if (J.rows() < 5 || J.rows() != residual_covs.size()) {
    throw Error(errc::invalid_input, "full_covariance: need N >= 5 rows with matching covariances");
  }
  if (!(residual_covs.minCoeff() > 0.0)) {
    throw Error(errc::invalid_input, "full_covariance: residual covariances must be positive");
  }
  Matrix5d info = Matrix5d::Zero();
  for (Eigen::Index i = 0; i < J.rows(); ++i) {
    const Vector5d row = J.row(i).transpose();
    info.noalias() += (row * row.transpose()) / residual_covs[i];
  }
  return invert_information(info, 1.0, /*approximate=*/false);
}

CalibrationCovariance approx_covariance(const Matrix5d& JtWJ, double c_r) {
  if (!(c_r > 0.0) || !std::isfinite(c_r)) {
    throw Error(errc::invalid_input, "approx_covariance: c_r must be positive");
  }
  return invert_information(JtWJ, c_r, /*approximate=*/true);
}

bool convergence_check(const CalibrationCovariance& cov, double threshold) {
  if (!(threshold > 0.0)) {
    throw Error(errc::invalid_input, "convergence_check: threshold must be positive");
  }
  return cov.lambda_max < threshold;
}

}  // namespace stereocal
