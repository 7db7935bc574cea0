#include "stereocal/geometry.hpp"

#include <cmath>

#include "stereocal/errors.hpp"

namespace stereocal {

void CameraIntrinsics::validate() const {
  const bool finite = std::isfinite(fx) && std::isfinite(fy) &&
                      std::isfinite(cx) && std::isfinite(cy);
  if (!finite || fx <= 0.0 || fy <= 0.0) {
    throw Error(errc::invalid_input, "intrinsics: focal lengths must be finite and positive");
  }
  if (width <= 0 || height <= 0 || cx <= 0.0 || cx >= width || cy <= 0.0 || cy >= height) {
    throw Error(errc::invalid_input, "intrinsics: principal point must lie inside the image");
  }
}

void PixelMatch::validate() const {
  if (frame_id < 0) {
    throw Error(errc::invalid_input, "pixel match: frame_id must be non-negative");
  }
  if (!(std::isfinite(u_l) && std::isfinite(v_l) && std::isfinite(u_r) && std::isfinite(v_r))) {
    throw Error(errc::invalid_input, "pixel match: pixel coordinates must be finite");
  }
  if (score && !std::isfinite(*score)) {
    throw Error(errc::invalid_input, "pixel match: score must be finite");
  }
}

ExtrinsicEstimate ExtrinsicEstimate::from_metric(const Eigen::Matrix3d& R,
                                                 const Eigen::Vector3d& t_metric) {
  ExtrinsicEstimate ext;
  ext.R = R;
  ext.baseline_length = t_metric.norm();
  if (ext.baseline_length <= 0.0) {
    throw Error(errc::invalid_input, "extrinsic: metric translation must be nonzero");
  }
  ext.t = t_metric / ext.baseline_length;
  return ext;
}

void ExtrinsicEstimate::validate() const {
  if (!R.allFinite() || !t.allFinite() || !std::isfinite(baseline_length)) {
    throw Error(errc::invalid_input, "extrinsic: non-finite entries");
  }
  const Eigen::Matrix3d gram = R.transpose() * R - Eigen::Matrix3d::Identity();
  if (gram.cwiseAbs().maxCoeff() > 1e-9 || std::abs(R.determinant() - 1.0) > 1e-9) {
    throw Error(errc::invalid_input, "extrinsic: R is not a rotation matrix");
  }
  if (std::abs(t.norm() - 1.0) > 1e-12) {
    throw Error(errc::invalid_input, "extrinsic: translation direction must have unit norm");
  }
  if (baseline_length <= 0.0) {
    throw Error(errc::invalid_input, "extrinsic: baseline length must be positive");
  }
}

Eigen::Vector3d normalize(const CameraIntrinsics& K, const Eigen::Vector2d& pixel) {
  K.validate();
  if (!pixel.allFinite()) {
    throw Error(errc::invalid_input, "normalize: pixel must be finite");
  }
  return {(pixel.x() - K.cx) / K.fx, (pixel.y() - K.cy) / K.fy, 1.0};
}

Eigen::Vector2d project_to_pixels(const CameraIntrinsics& K, const Eigen::Vector3d& f) {
  return {K.fx * f.x() + K.cx, K.fy * f.y() + K.cy};
}

NormalizedMatch normalize_match(const CameraIntrinsics& left,
                                const CameraIntrinsics& right,
                                const PixelMatch& m) {
  NormalizedMatch out;
  out.f = normalize(left, {m.u_l, m.v_l});
  out.f_prime = normalize(right, {m.u_r, m.v_r});
  out.pixel = m;
  out.disparity = std::abs(m.u_l - m.u_r);
  return out;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
  Eigen::Matrix3d s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
      -a.y(), a.x(), 0.0;
  return s;
}

EssentialMatrix essential_from(const ExtrinsicEstimate& ext) {
  return {skew(ext.t) * ext.R};
}

double epipolar_residual(const EssentialMatrix& E, const NormalizedMatch& m) {
  return m.f_prime.dot(E.E * m.f);
}

namespace {

Eigen::Matrix3d intrinsics_inverse(const CameraIntrinsics& K) {
  Eigen::Matrix3d inv;
  inv << 1.0 / K.fx, 0.0, -K.cx / K.fx,
         0.0, 1.0 / K.fy, -K.cy / K.fy,
         0.0, 0.0, 1.0;
  return inv;
}

}  // namespace

Eigen::Matrix3d fundamental_from(const CameraIntrinsics& K_l,
                                 const CameraIntrinsics& K_r,
                                 const EssentialMatrix& E) {
  return intrinsics_inverse(K_r).transpose() * E.E * intrinsics_inverse(K_l);
}

std::optional<double> pixel_epipolar_distance(const Eigen::Matrix3d& F,
                                              const PixelMatch& m) {
  const Eigen::Vector3d line = F * Eigen::Vector3d(m.u_l, m.v_l, 1.0);
  const double norm = std::hypot(line.x(), line.y());
  if (norm == 0.0) {
    return std::nullopt;
  }
  const double incidence = line.dot(Eigen::Vector3d(m.u_r, m.v_r, 1.0));
  return std::abs(incidence) / norm;
}

std::optional<double> pixel_epipolar_distance(const CameraIntrinsics& K_l,
                                              const CameraIntrinsics& K_r,
                                              const EssentialMatrix& E,
                                              const PixelMatch& m) {
  K_l.validate();
  K_r.validate();
  return pixel_epipolar_distance(fundamental_from(K_l, K_r, E), m);
}

}  // namespace stereocal
