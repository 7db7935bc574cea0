#pragma once

#include <Eigen/Core>

namespace stereocal {

/// Rotation from fixed-axis X-Y-Z angles (roll, pitch, yaw) in degrees:
/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
Eigen::Matrix3d rotation_from_euler_xyz_deg(const Eigen::Vector3d& angles_deg);

/// Inverse of rotation_from_euler_xyz_deg (degrees).
Eigen::Vector3d euler_xyz_deg_from_rotation(const Eigen::Matrix3d& R);

/// SO(3) logarithm: axis-angle vector with R = exp(skew(w)).
Eigen::Vector3d rotation_log(const Eigen::Matrix3d& R);

/// Angle of the rotation taking a to b, in degrees. Both must be nonzero.
double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// Unit quaternion (w, x, y, z) with canonical sign (first nonzero > 0).
Eigen::Vector4d quaternion_wxyz(const Eigen::Matrix3d& R);

}  // namespace stereocal
