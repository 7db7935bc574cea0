#include "stereocal/simulator.hpp"

#include <cmath>

#include "stereocal/errors.hpp"
#include "stereocal/geometry.hpp"
#include "stereocal/rotations.hpp"

namespace stereocal {

namespace {
constexpr int kMaxConsecutiveResamples = 1000;
}

void SceneConfig::validate() const {
  if (num_points_per_frame < 1 || frames < 1) {
    throw Error(errc::config, "scene config: counts must be positive");
  }
  if (!(depth_min > 0.0) || !(depth_max >= depth_min)) {
    throw Error(errc::config, "scene config: need 0 < depth_min <= depth_max");
  }
  if (!(sigma_px >= 0.0) || !(outlier_fraction >= 0.0) || outlier_fraction >= 1.0) {
    throw Error(errc::config, "scene config: invalid noise or outlier settings");
  }
}

GroundTruth default_ground_truth() {
  GroundTruth truth;
  truth.intrinsics_left = {230.0, 230.0, 320.0, 240.0, 640, 480};
  truth.intrinsics_right = truth.intrinsics_left;
  const Eigen::Matrix3d R = rotation_from_euler_xyz_deg({0.25, 0.36, 1.07});
  truth.extrinsic = ExtrinsicEstimate::from_metric(R, {-0.1386, -0.0009, 0.0026});
  return truth;
}

namespace {

// Noiseless projection into the right view; nullopt when invisible.
std::optional<Eigen::Vector2d> right_pixel(const GroundTruth& truth,
                                           const Eigen::Vector3d& point) {
  const Eigen::Vector3d x_r =
      truth.extrinsic.R * point + truth.extrinsic.metric_translation();
  if (!(x_r.z() > 0.0)) return std::nullopt;
  const CameraIntrinsics& K = truth.intrinsics_right;
  const Eigen::Vector2d px(K.fx * x_r.x() / x_r.z() + K.cx,
                           K.fy * x_r.y() / x_r.z() + K.cy);
  if (!K.contains(px.x(), px.y())) return std::nullopt;
  return px;
}

}  // namespace

std::vector<Eigen::Vector3d> generate_scene(const SceneConfig& cfg, const GroundTruth& truth,
                                            RandomEngine& rng) {
  cfg.validate();
  truth.extrinsic.validate();
  const CameraIntrinsics& K = truth.intrinsics_left;
  K.validate();
  truth.intrinsics_right.validate();

  std::vector<Eigen::Vector3d> points;
  points.reserve(cfg.num_points_per_frame);
  int failures = 0;
  while (points.size() < static_cast<std::size_t>(cfg.num_points_per_frame)) {
    const double u = rng.uniform(0.0, static_cast<double>(K.width));
    const double v = rng.uniform(0.0, static_cast<double>(K.height));
    const double depth = rng.uniform(cfg.depth_min, cfg.depth_max);
    const Eigen::Vector3d point =
        depth * Eigen::Vector3d((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
    if (!right_pixel(truth, point)) {
      if (++failures >= kMaxConsecutiveResamples) {
        throw Error(errc::config,
                    "generate_scene: cameras share no visible volume in the depth range");
      }
      continue;
    }
    failures = 0;
    points.push_back(point);
  }
  return points;
}

std::optional<PixelMatch> project(const GroundTruth& truth, const Eigen::Vector3d& point,
                                  const SceneConfig& cfg, RandomEngine& rng,
                                  std::int64_t frame_id) {
  if (!(point.z() > 0.0)) return std::nullopt;
  const Eigen::Vector3d x_r =
      truth.extrinsic.R * point + truth.extrinsic.metric_translation();
  if (!(x_r.z() > 0.0)) return std::nullopt;

  const CameraIntrinsics& Kl = truth.intrinsics_left;
  const CameraIntrinsics& Kr = truth.intrinsics_right;
  PixelMatch m;
  m.frame_id = frame_id;
  m.u_l = Kl.fx * point.x() / point.z() + Kl.cx;
  m.v_l = Kl.fy * point.y() / point.z() + Kl.cy;
  m.u_r = Kr.fx * x_r.x() / x_r.z() + Kr.cx;
  m.v_r = Kr.fy * x_r.y() / x_r.z() + Kr.cy;

  if (cfg.sigma_px > 0.0) {
    m.u_l += cfg.sigma_px * rng.gaussian();
    m.v_l += cfg.sigma_px * rng.gaussian();
    m.u_r += cfg.sigma_px * rng.gaussian();
    m.v_r += cfg.sigma_px * rng.gaussian();
  }
  if (cfg.quantize_pixels) {
    m.u_l = std::round(m.u_l);
    m.v_l = std::round(m.v_l);
    m.u_r = std::round(m.u_r);
    m.v_r = std::round(m.v_r);
  }
  return m;
}

std::pair<std::vector<PixelMatch>, std::vector<std::uint8_t>> inject_outliers(
    std::span<const PixelMatch> matches, double fraction, RandomEngine& rng,
    const CameraIntrinsics& right) {
  if (!(fraction >= 0.0) || fraction >= 1.0) {
    throw Error(errc::invalid_input, "inject_outliers: fraction must be in [0, 1)");
  }
  std::vector<PixelMatch> out(matches.begin(), matches.end());
  std::vector<std::uint8_t> labels(out.size(), 0);
  const auto count = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(out.size())));
  if (count == 0) return {out, labels};

  for (std::size_t idx : rng.sample_indices(out.size(), count)) {
    out[idx].u_r = rng.uniform(0.0, static_cast<double>(right.width));
    out[idx].v_r = rng.uniform(0.0, static_cast<double>(right.height));
    labels[idx] = 1;
  }
  return {out, labels};
}

SimulatedDataset simulate(const SceneConfig& cfg, const GroundTruth& truth) {
  cfg.validate();
  RandomEngine rng(cfg.seed);
  SimulatedDataset data;
  data.truth = truth;

  for (int frame = 0; frame < cfg.frames; ++frame) {
    const std::vector<Eigen::Vector3d> points = generate_scene(cfg, truth, rng);
    std::vector<PixelMatch> matches;
    matches.reserve(points.size());
    for (const Eigen::Vector3d& p : points) {
      // Visibility was enforced by generate_scene; noise may still push the
      // pixels slightly out of bounds, which downstream stages tolerate.
      if (auto m = project(truth, p, cfg, rng, frame)) {
        matches.push_back(*m);
      }
    }
    std::vector<std::uint8_t> labels(matches.size(), 0);
    if (cfg.outlier_fraction > 0.0) {
      std::tie(matches, labels) =
          inject_outliers(matches, cfg.outlier_fraction, rng, truth.intrinsics_right);
    }
    data.truth.outlier_labels.insert(data.truth.outlier_labels.end(), labels.begin(),
                                     labels.end());
    data.frames.push_back(std::move(matches));
    data.outlier_labels.push_back(std::move(labels));
  }
  return data;
}

}  // namespace stereocal
