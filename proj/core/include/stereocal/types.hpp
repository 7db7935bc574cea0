#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

namespace stereocal {

using Matrix5d = Eigen::Matrix<double, 5, 5>;
using Vector5d = Eigen::Matrix<double, 5, 1>;
using MatrixX5d = Eigen::Matrix<double, Eigen::Dynamic, 5>;

/// Pinhole camera: maps pixels to bearing vectors and back.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool contains(double u, double v) const {
    return u >= 0.0 && u < static_cast<double>(width) && v >= 0.0 &&
           v < static_cast<double>(height);
  }

  // Throws errc::invalid_input when the intrinsics are unusable.
  void validate() const;
};

/// One left/right pixel correspondence as delivered by an upstream matcher.
struct PixelMatch {
  std::int64_t frame_id = 0;
  double u_l = 0.0;
  double v_l = 0.0;
  double u_r = 0.0;
  double v_r = 0.0;
  // Optional matcher confidence; thresholded by the pipeline when present.
  std::optional<double> score;

  void validate() const;

  bool operator==(const PixelMatch&) const = default;
};

/// A correspondence lifted to normalized image coordinates (z component == 1).
struct NormalizedMatch {
  Eigen::Vector3d f = Eigen::Vector3d::UnitZ();        // left bearing
  Eigen::Vector3d f_prime = Eigen::Vector3d::UnitZ();  // right bearing
  PixelMatch pixel;                                    // provenance
  double disparity = 0.0;                              // |u_l - u_r| in pixels
};

/// Relative pose of the right camera w.r.t. the left: rotation plus unit
/// translation direction. The metric baseline length is carried separately
/// and never optimized (scale is unobservable from epipolar constraints).
struct ExtrinsicEstimate {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::UnitX();
  double baseline_length = 1.0;

  Eigen::Vector3d metric_translation() const { return baseline_length * t; }

  static ExtrinsicEstimate from_metric(const Eigen::Matrix3d& R,
                                       const Eigen::Vector3d& t_metric);

  // Checks R in SO(3) (1e-9), ||t|| == 1 (1e-12) and baseline > 0.
  void validate() const;
};

struct EssentialMatrix {
  Eigen::Matrix3d E = Eigen::Matrix3d::Zero();
};

}  // namespace stereocal
