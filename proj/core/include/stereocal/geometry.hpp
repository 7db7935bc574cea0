#pragma once

#include <optional>

#include <Eigen/Core>

#include "stereocal/types.hpp"

namespace stereocal {

/// Pixel -> bearing vector [(u-cx)/fx, (v-cy)/fy, 1].
Eigen::Vector3d normalize(const CameraIntrinsics& K, const Eigen::Vector2d& pixel);

/// Bearing (z == 1) -> pixel. Inverse of normalize.
Eigen::Vector2d project_to_pixels(const CameraIntrinsics& K, const Eigen::Vector3d& f);

/// Lifts a pixel correspondence to normalized coordinates, keeping pixel
/// provenance and the horizontal disparity |u_l - u_r|.
NormalizedMatch normalize_match(const CameraIntrinsics& left,
                                const CameraIntrinsics& right,
                                const PixelMatch& m);

/// Skew-symmetric cross-product matrix: skew(a) * b == a x b.
Eigen::Matrix3d skew(const Eigen::Vector3d& a);

/// E = skew(t) * R. Rank 2 with singular values proportional to (1, 1, 0).
EssentialMatrix essential_from(const ExtrinsicEstimate& ext);

/// Signed epipolar residual r = f'^T E f. Zero for a perfect correspondence.
double epipolar_residual(const EssentialMatrix& E, const NormalizedMatch& m);

/// F = K_r^-T E K_l^-1 for pixel-space epipolar lines.
Eigen::Matrix3d fundamental_from(const CameraIntrinsics& K_l,
                                 const CameraIntrinsics& K_r,
                                 const EssentialMatrix& E);

/// Point-to-line distance in pixels from the right pixel to the epipolar line
/// of the left pixel. nullopt when the line is degenerate (first two
/// coefficients both zero); the caller treats such matches as unverifiable.
std::optional<double> pixel_epipolar_distance(const CameraIntrinsics& K_l,
                                              const CameraIntrinsics& K_r,
                                              const EssentialMatrix& E,
                                              const PixelMatch& m);

/// Same metric with a precomputed fundamental matrix (hot path).
std::optional<double> pixel_epipolar_distance(const Eigen::Matrix3d& F,
                                              const PixelMatch& m);

}  // namespace stereocal
