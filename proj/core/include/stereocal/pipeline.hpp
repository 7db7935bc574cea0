#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stereocal/covariance.hpp"
#include "stereocal/optimizer.hpp"
#include "stereocal/random.hpp"
#include "stereocal/types.hpp"

namespace stereocal {

struct GridConfig {
  int cols = 16;
  int rows = 25;
  int cell_capacity = 10;

  void validate() const;
};

struct RejectionConfig {
  double prior_gate_px = 20.0;
  double ransac_threshold_px = 1.5;
  double ransac_confidence = 0.99;
  int ransac_max_iterations = 500;
  std::uint64_t seed = 0;
  // Cross-check / uniqueness run upstream; when the matcher forwards a score
  // we honor it with a simple threshold.
  std::optional<double> min_score;
  // Pixels per normalized unit for the Sampson threshold (set from the
  // intrinsics by the session).
  double pixel_scale = 1.0;

  void validate() const;
};

/// Keeps matches whose right pixel lies within gate_px of the epipolar line
/// predicted by the prior. Degenerate lines count as unverifiable and are
/// dropped. Order is preserved.
std::vector<PixelMatch> prior_gate(const ExtrinsicEstimate& prior,
                                   const CameraIntrinsics& K_l, const CameraIntrinsics& K_r,
                                   std::span<const PixelMatch> matches, double gate_px);

struct RansacResult {
  std::vector<NormalizedMatch> inliers;  // input order
  EssentialMatrix essential;             // singular values projected to (1, 1, 0)
  bool low_consensus = false;            // consensus below half the input
  int iterations_run = 0;
};

/// 8-point RANSAC over normalized matches, scored by Sampson distance in
/// pixel units. Deterministic for a given engine state; the final model is
/// refit on the best consensus set.
RansacResult ransac_essential(std::span<const NormalizedMatch> matches,
                              const RejectionConfig& cfg, RandomEngine& rng);
RansacResult ransac_essential(std::span<const NormalizedMatch> matches,
                              const RejectionConfig& cfg);

/// Grid of per-cell match lists keyed by the left pixel. Cells keep at most
/// cell_capacity entries, preferring large disparities; near-boundary ties
/// (within 1 px of the cutoff) are broken randomly.
class FeatureBuffer {
 public:
  FeatureBuffer(const GridConfig& grid, int image_width, int image_height);

  void insert(std::span<const NormalizedMatch> matches, RandomEngine& rng);

  std::size_t total_count() const { return total_; }
  std::size_t capacity() const;
  std::size_t skipped_out_of_bounds() const { return skipped_oob_; }
  const GridConfig& grid() const { return grid_; }
  const std::vector<NormalizedMatch>& cell(int row, int col) const;

  /// All stored matches, row-major over cells, insertion order within a cell.
  std::vector<NormalizedMatch> snapshot() const;

 private:
  GridConfig grid_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::vector<NormalizedMatch>> cells_;
  std::size_t total_ = 0;
  std::size_t skipped_oob_ = 0;
};

/// Functional form of FeatureBuffer::insert.
void grid_insert(FeatureBuffer& buffer, std::span<const NormalizedMatch> matches,
                 RandomEngine& rng);
void grid_insert(FeatureBuffer& buffer, std::span<const NormalizedMatch> matches,
                 std::uint64_t seed);

struct SessionConfig {
  OptimizerConfig optimizer;
  RejectionConfig rejection;
  GridConfig grid;
  double sigma_px = 0.5;
  double convergence_threshold = 7.6e-7;
  int optimize_every = 1;
  bool use_approx_covariance = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SessionDiagnostics {
  std::size_t matches_in = 0;
  std::size_t matches_after_score = 0;
  std::size_t matches_after_gate = 0;
  std::size_t matches_after_ransac = 0;
  std::size_t empty_frames = 0;
  std::size_t ransac_skipped_frames = 0;  // fewer than 8 gated matches
  std::size_t low_consensus_frames = 0;
  std::size_t optimization_failures = 0;
  std::string last_error;
};

/// Single-writer calibration session: per-frame ingestion (score gate ->
/// prior gate -> RANSAC -> grid insertion) followed by an optimize +
/// covariance pass every optimize_every frames. Frame-level failures are
/// recorded in the diagnostics and never abort the session.
class CalibrationSession {
 public:
  CalibrationSession(const CameraIntrinsics& left, const CameraIntrinsics& right,
                     const ExtrinsicEstimate& prior, const SessionConfig& cfg);

  /// No-op once terminated.
  void process_frame(std::span<const PixelMatch> frame);

  const ExtrinsicEstimate& estimate() const { return estimate_; }
  const CalibrationCovariance& covariance() const { return covariance_; }
  bool terminated() const { return terminated_; }
  std::size_t frames_processed() const { return frames_processed_; }
  const FeatureBuffer& buffer() const { return buffer_; }
  const SessionDiagnostics& diagnostics() const { return diagnostics_; }
  const std::optional<OptimizationResult>& last_optimization() const {
    return last_optimization_;
  }
  const CameraIntrinsics& left_intrinsics() const { return left_; }
  const CameraIntrinsics& right_intrinsics() const { return right_; }
  const SessionConfig& config() const { return cfg_; }

  /// RMS pixel epipolar distance of the buffered matches at the current
  /// estimate; 0 when the buffer is empty.
  double buffer_rms_epipolar_px() const;

 private:
  void run_optimization();

  CameraIntrinsics left_;
  CameraIntrinsics right_;
  SessionConfig cfg_;
  NoiseModel noise_;
  RandomEngine rng_;
  FeatureBuffer buffer_;
  ExtrinsicEstimate estimate_;
  CalibrationCovariance covariance_;
  std::optional<OptimizationResult> last_optimization_;
  SessionDiagnostics diagnostics_;
  std::size_t frames_processed_ = 0;
  bool terminated_ = false;
};

}  // namespace stereocal
