#include "stereocal/rotations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

namespace stereocal {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}  // namespace

Eigen::Matrix3d rotation_from_euler_xyz_deg(const Eigen::Vector3d& angles_deg) {
  const Eigen::Vector3d a = angles_deg * kDegToRad;
  const Eigen::AngleAxisd rx(a.x(), Eigen::Vector3d::UnitX());
  const Eigen::AngleAxisd ry(a.y(), Eigen::Vector3d::UnitY());
  const Eigen::AngleAxisd rz(a.z(), Eigen::Vector3d::UnitZ());
  return (rz * ry * rx).toRotationMatrix();
}

Eigen::Vector3d euler_xyz_deg_from_rotation(const Eigen::Matrix3d& R) {
  // R = Rz(c) Ry(b) Rx(a): R(2,0) = -sin b.
  const double sb = -R(2, 0);
  double a, b, c;
  if (std::abs(sb) > 1.0 - 1e-12) {
    // Gimbal lock: split the remaining rotation into yaw only.
    b = std::copysign(std::numbers::pi / 2.0, sb);
    a = 0.0;
    c = std::atan2(-R(0, 1), R(1, 1));
  } else {
    b = std::asin(sb);
    a = std::atan2(R(2, 1), R(2, 2));
    c = std::atan2(R(1, 0), R(0, 0));
  }
  return Eigen::Vector3d(a, b, c) * kRadToDeg;
}

Eigen::Vector3d rotation_log(const Eigen::Matrix3d& R) {
  const Eigen::AngleAxisd aa(R);
  return aa.angle() * aa.axis();
}

double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0)) * kRadToDeg;
}

Eigen::Vector4d quaternion_wxyz(const Eigen::Matrix3d& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
  for (int i = 0; i < 4; ++i) {
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace stereocal
