#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "stereocal/random.hpp"
#include "stereocal/types.hpp"

namespace stereocal {

struct SceneConfig {
  int num_points_per_frame = 400;
  double depth_min = 2.0;
  double depth_max = 20.0;
  double sigma_px = 0.5;
  double outlier_fraction = 0.0;
  bool quantize_pixels = false;
  std::uint64_t seed = 1;
  int frames = 20;

  void validate() const;
};

/// Known simulation geometry: the extrinsic to recover plus the cameras.
/// outlier_labels is filled by simulate() with one flag per emitted match
/// (flattened in frame order).
struct GroundTruth {
  ExtrinsicEstimate extrinsic;
  CameraIntrinsics intrinsics_left;
  CameraIntrinsics intrinsics_right;
  std::vector<std::uint8_t> outlier_labels;
};

/// Paper-regime defaults: VGA at fx = fy = 230 (wide angle), rotation from
/// fixed-axis X-Y-Z angles (0.25, 0.36, 1.07) degrees and metric translation
/// (-0.1386, -0.0009, 0.0026) meters.
GroundTruth default_ground_truth();

/// Uniform samples in the left frustum between depth_min and depth_max,
/// resampled until visible in both views. Fresh points every call; the
/// pipeline never relies on temporal correspondences.
std::vector<Eigen::Vector3d> generate_scene(const SceneConfig& cfg, const GroundTruth& truth,
                                            RandomEngine& rng);

/// Projects one world point into both cameras with additive Gaussian pixel
/// noise (and optional rounding). nullopt when the point is behind a camera.
std::optional<PixelMatch> project(const GroundTruth& truth, const Eigen::Vector3d& point,
                                  const SceneConfig& cfg, RandomEngine& rng,
                                  std::int64_t frame_id);

/// Replaces the right pixel of a seeded random subset (round(fraction * n)
/// entries) with uniform in-bounds pixels. Returns corrupted matches plus
/// one label per entry marking the injected ones.
std::pair<std::vector<PixelMatch>, std::vector<std::uint8_t>> inject_outliers(
    std::span<const PixelMatch> matches, double fraction, RandomEngine& rng,
    const CameraIntrinsics& right);

struct SimulatedDataset {
  GroundTruth truth;
  std::vector<std::vector<PixelMatch>> frames;
  std::vector<std::vector<std::uint8_t>> outlier_labels;  // parallel to frames
};

/// Full dataset generation driven by cfg.seed.
SimulatedDataset simulate(const SceneConfig& cfg, const GroundTruth& truth);

}  // namespace stereocal
