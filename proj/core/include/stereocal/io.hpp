#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stereocal/pipeline.hpp"
#include "stereocal/simulator.hpp"
#include "stereocal/types.hpp"

namespace stereocal {

struct StereoIntrinsics {
  CameraIntrinsics left;
  CameraIntrinsics right;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Match table: CSV with header frame_id,u_l,v_l,u_r,v_r[,score], UTF-8, LF
/// newlines, frame ids non-decreasing. Rows with equal frame_id form one
/// frame. Malformed rows raise DataFormatError with the 1-based line number.
std::vector<std::vector<PixelMatch>> read_matches(const std::filesystem::path& path);
void write_matches(const std::filesystem::path& path,
                   std::span<const std::vector<PixelMatch>> frames);

StereoIntrinsics read_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const std::filesystem::path& path, const StereoIntrinsics& intr);

/// Extrinsic document: {"R": [9 row-major] | "euler_xyz_deg": [3], "t": [3],
/// "baseline_length": x}. Inputs within 1e-6 of the manifold are canonicalized
/// (orthogonal projection of R, renormalization of t); anything further off is
/// rejected.
ExtrinsicEstimate read_extrinsic(const std::filesystem::path& path);
void write_extrinsic(const std::filesystem::path& path, const ExtrinsicEstimate& ext);

/// Outlier labels parallel to a match table: header is_outlier, one 0/1 row
/// per match row.
std::vector<std::vector<std::uint8_t>> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path,
                  std::span<const std::vector<std::uint8_t>> labels);

/// Run configuration with optional sections scene / optimizer / rejection /
/// grid / session; unknown keys are rejected.
struct AppConfig {
  SceneConfig scene;
  SessionConfig session;
};
AppConfig read_config(const std::filesystem::path& path);
/// Effective configuration as a JSON object (the report echo).
std::string config_echo_json(const AppConfig& cfg);

struct CalibrationReport {
  Eigen::Vector4d quaternion_wxyz = {1, 0, 0, 0};
  Eigen::Vector3d euler_xyz_deg = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation_unit = Eigen::Vector3d::UnitX();
  Eigen::Vector3d translation_metric = Eigen::Vector3d::UnitX();
  double baseline_length = 1.0;
  Matrix5d covariance = Matrix5d::Zero();
  double lambda_max = 0.0;
  bool covariance_approximate = false;
  int iterations = 0;
  bool converged = false;
  bool terminated = false;
  double rms_epipolar_px = 0.0;
  std::size_t frames_processed = 0;
  std::size_t buffer_count = 0;
  SessionDiagnostics counts;
  std::size_t out_of_bounds_skipped = 0;
  std::string config_echo;  // JSON object text
  std::uint64_t seed = 0;
};

CalibrationReport build_report(const CalibrationSession& session,
                               const std::string& config_echo, std::uint64_t seed);
std::string report_json(const CalibrationReport& report);
void write_report(const std::filesystem::path& path, const CalibrationReport& report);

/// One row per optimization pass, for external plotting.
struct TraceRow {
  std::size_t frame = 0;
  std::size_t buffer_size = 0;
  double lambda_max = 0.0;
  Eigen::Vector3d euler_xyz_deg = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation_unit = Eigen::Vector3d::UnitX();
  bool terminated = false;
};
void write_trace(const std::filesystem::path& path, std::span<const TraceRow> rows);

}  // namespace stereocal
