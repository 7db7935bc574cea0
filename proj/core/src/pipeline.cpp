#include "stereocal/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "stereocal/errors.hpp"
#include "stereocal/geometry.hpp"

namespace stereocal {

void GridConfig::validate() const {
  if (cols < 1 || rows < 1 || cell_capacity < 1) {
    throw Error(errc::invalid_input, "grid config: dimensions and capacity must be positive");
  }
}

void RejectionConfig::validate() const {
  if (!(prior_gate_px > 0.0) || !(ransac_threshold_px > 0.0) || !(pixel_scale > 0.0)) {
    throw Error(errc::invalid_input, "rejection config: thresholds must be positive");
  }
  if (!(ransac_confidence > 0.0) || !(ransac_confidence < 1.0) || ransac_max_iterations < 1) {
    throw Error(errc::invalid_input, "rejection config: invalid RANSAC settings");
  }
}

void SessionConfig::validate() const {
  optimizer.validate();
  rejection.validate();
  grid.validate();
  if (!(sigma_px >= 0.0) || !(convergence_threshold > 0.0) || optimize_every < 1) {
    throw Error(errc::invalid_input, "session config: invalid noise or cadence settings");
  }
}

std::vector<PixelMatch> prior_gate(const ExtrinsicEstimate& prior,
                                   const CameraIntrinsics& K_l, const CameraIntrinsics& K_r,
                                   std::span<const PixelMatch> matches, double gate_px) {
  if (!(gate_px > 0.0)) {
    throw Error(errc::invalid_input, "prior_gate: gate must be positive");
  }
  const Eigen::Matrix3d F = fundamental_from(K_l, K_r, essential_from(prior));
  std::vector<PixelMatch> kept;
  kept.reserve(matches.size());
  for (const PixelMatch& m : matches) {
    const std::optional<double> d = pixel_epipolar_distance(F, m);
    if (d && *d <= gate_px) {
      kept.push_back(m);
    }
  }
  return kept;
}

namespace {

// Least-squares essential matrix from >= 8 matches; nullopt when the design
// matrix is rank deficient. Scale fixed by the (1, 1, 0) projection.
std::optional<Eigen::Matrix3d> eight_point(std::span<const NormalizedMatch> matches,
                                           std::span<const std::size_t> idx) {
  Eigen::Matrix<double, 9, 9> AtA = Eigen::Matrix<double, 9, 9>::Zero();
  for (const std::size_t i : idx) {
    const Eigen::Vector3d& f = matches[i].f;
    const Eigen::Vector3d& fp = matches[i].f_prime;
    Eigen::Matrix<double, 9, 1> a;
    a << fp.x() * f.x(), fp.x() * f.y(), fp.x() * f.z(),
         fp.y() * f.x(), fp.y() * f.y(), fp.y() * f.z(),
         fp.z() * f.x(), fp.z() * f.y(), fp.z() * f.z();
    AtA.noalias() += a * a.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> eig(AtA);
  const auto& lambda = eig.eigenvalues();
  // Two vanishing eigenvalues mean the sample does not pin the model.
  if (lambda[1] <= lambda[8] * 1e-12) {
    return std::nullopt;
  }
  const Eigen::Matrix<double, 9, 1> e = eig.eigenvectors().col(0);
  Eigen::Matrix3d E;
  E << e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8];

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!(svd.singularValues()[0] > 0.0)) {
    return std::nullopt;
  }
  return svd.matrixU() * Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal() *
         svd.matrixV().transpose();
}

// Sampson distance in pixel units (exact for fx == fy; the pixel_scale
// approximation otherwise).
double sampson_px(const Eigen::Matrix3d& E, const NormalizedMatch& m, double pixel_scale) {
  const Eigen::Vector3d Ef = E * m.f;
  const Eigen::Vector3d Etfp = E.transpose() * m.f_prime;
  const double r = m.f_prime.dot(Ef);
  const double denom2 = Ef.x() * Ef.x() + Ef.y() * Ef.y() +
                        Etfp.x() * Etfp.x() + Etfp.y() * Etfp.y();
  if (!(denom2 > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return pixel_scale * std::abs(r) / std::sqrt(denom2);
}

std::vector<std::size_t> inlier_indices(std::span<const NormalizedMatch> matches,
                                        const Eigen::Matrix3d& E, double threshold_px,
                                        double pixel_scale) {
  std::vector<std::size_t> idx;
  idx.reserve(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (sampson_px(E, matches[i], pixel_scale) <= threshold_px) {
      idx.push_back(i);
    }
  }
  return idx;
}

int adaptive_iterations(double inlier_ratio, double confidence, int cap) {
  if (inlier_ratio <= 0.0) return cap;
  const double w8 = std::pow(inlier_ratio, 8.0);
  if (w8 >= 1.0) return 1;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - w8);
  if (!(n > 0.0)) return 1;
  return n >= static_cast<double>(cap) ? cap : static_cast<int>(std::ceil(n));
}

}  // namespace

RansacResult ransac_essential(std::span<const NormalizedMatch> matches,
                              const RejectionConfig& cfg, RandomEngine& rng) {
  cfg.validate();
  const std::size_t n = matches.size();
  if (n < 8) {
    throw Error(errc::insufficient_data, "ransac_essential: need at least 8 matches");
  }

  std::optional<Eigen::Matrix3d> best_model;
  std::vector<std::size_t> best_inliers;
  int budget = cfg.ransac_max_iterations;
  int it = 0;
  for (; it < budget; ++it) {
    const std::vector<std::size_t> sample = rng.sample_indices(n, 8);
    const std::optional<Eigen::Matrix3d> model = eight_point(matches, sample);
    if (!model) continue;
    std::vector<std::size_t> inliers =
        inlier_indices(matches, *model, cfg.ransac_threshold_px, cfg.pixel_scale);
    if (inliers.size() > best_inliers.size()) {
      best_inliers = std::move(inliers);
      best_model = model;
      budget = std::min(budget,
                        it + 1 + adaptive_iterations(
                                     static_cast<double>(best_inliers.size()) /
                                         static_cast<double>(n),
                                     cfg.ransac_confidence, cfg.ransac_max_iterations));
    }
  }
  if (!best_model || best_inliers.size() < 8) {
    throw Error(errc::degenerate_geometry,
                "ransac_essential: no valid model within the iteration budget");
  }

  // Refit on the consensus set and refresh the inliers once.
  if (const std::optional<Eigen::Matrix3d> refit = eight_point(matches, best_inliers)) {
    std::vector<std::size_t> refreshed =
        inlier_indices(matches, *refit, cfg.ransac_threshold_px, cfg.pixel_scale);
    if (refreshed.size() >= 8) {
      best_model = refit;
      best_inliers = std::move(refreshed);
    }
  }

  RansacResult out;
  out.essential.E = *best_model;
  out.iterations_run = it;
  out.low_consensus = 2 * best_inliers.size() < n;
  out.inliers.reserve(best_inliers.size());
  for (const std::size_t i : best_inliers) {
    out.inliers.push_back(matches[i]);
  }
  return out;
}

RansacResult ransac_essential(std::span<const NormalizedMatch> matches,
                              const RejectionConfig& cfg) {
  RandomEngine rng(cfg.seed);
  return ransac_essential(matches, cfg, rng);
}

FeatureBuffer::FeatureBuffer(const GridConfig& grid, int image_width, int image_height)
    : grid_(grid), width_(image_width), height_(image_height) {
  grid_.validate();
  if (width_ < 1 || height_ < 1) {
    throw Error(errc::invalid_input, "feature buffer: image dimensions must be positive");
  }
  cells_.resize(static_cast<std::size_t>(grid_.cols) * static_cast<std::size_t>(grid_.rows));
}

std::size_t FeatureBuffer::capacity() const {
  return cells_.size() * static_cast<std::size_t>(grid_.cell_capacity);
}

const std::vector<NormalizedMatch>& FeatureBuffer::cell(int row, int col) const {
  return cells_[static_cast<std::size_t>(row) * grid_.cols + col];
}

void FeatureBuffer::insert(std::span<const NormalizedMatch> matches, RandomEngine& rng) {
  std::vector<std::size_t> touched;
  touched.reserve(matches.size());
  for (const NormalizedMatch& m : matches) {
    const double u = m.pixel.u_l;
    const double v = m.pixel.v_l;
    if (!(u >= 0.0) || u >= width_ || !(v >= 0.0) || v >= height_) {
      ++skipped_oob_;
      continue;
    }
    auto col = static_cast<int>(u * grid_.cols / width_);
    auto row = static_cast<int>(v * grid_.rows / height_);
    col = std::min(col, grid_.cols - 1);
    row = std::min(row, grid_.rows - 1);
    const std::size_t cell_idx = static_cast<std::size_t>(row) * grid_.cols + col;
    cells_[cell_idx].push_back(m);
    touched.push_back(cell_idx);
  }

  // Canonical cell order keeps the RNG stream independent of arrival order.
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  const auto cap = static_cast<std::size_t>(grid_.cell_capacity);
  for (const std::size_t cell_idx : touched) {
    std::vector<NormalizedMatch>& pool = cells_[cell_idx];
    if (pool.size() <= cap) continue;

    // Cutoff disparity = capacity-th largest.
    std::vector<double> d(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) d[i] = pool[i].disparity;
    std::vector<double> sorted = d;
    std::nth_element(sorted.begin(), sorted.begin() + (cap - 1), sorted.end(),
                     std::greater<double>());
    const double cutoff = sorted[cap - 1];

    // Everything clearly above the cutoff stays; candidates within 1 px of it
    // compete for the remaining slots at random.
    std::vector<std::size_t> sure, tie;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (d[i] > cutoff) {
        sure.push_back(i);
      } else if (d[i] > cutoff - 1.0) {
        tie.push_back(i);
      }
    }
    const std::size_t slots = cap - sure.size();
    std::vector<char> keep(pool.size(), 0);
    for (const std::size_t i : sure) keep[i] = 1;
    if (tie.size() <= slots) {
      for (const std::size_t i : tie) keep[i] = 1;
    } else {
      for (const std::size_t pick : rng.sample_indices(tie.size(), slots)) {
        keep[tie[pick]] = 1;
      }
    }

    std::vector<NormalizedMatch> kept;
    kept.reserve(cap);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (keep[i]) kept.push_back(pool[i]);
    }
    pool = std::move(kept);
  }

  total_ = 0;
  for (const auto& cell : cells_) total_ += cell.size();
}

std::vector<NormalizedMatch> FeatureBuffer::snapshot() const {
  std::vector<NormalizedMatch> out;
  out.reserve(total_);
  for (const auto& cell : cells_) {
    out.insert(out.end(), cell.begin(), cell.end());
  }
  return out;
}

void grid_insert(FeatureBuffer& buffer, std::span<const NormalizedMatch> matches,
                 RandomEngine& rng) {
  buffer.insert(matches, rng);
}

void grid_insert(FeatureBuffer& buffer, std::span<const NormalizedMatch> matches,
                 std::uint64_t seed) {
  RandomEngine rng(seed);
  buffer.insert(matches, rng);
}

CalibrationSession::CalibrationSession(const CameraIntrinsics& left,
                                       const CameraIntrinsics& right,
                                       const ExtrinsicEstimate& prior,
                                       const SessionConfig& cfg)
    : left_(left),
      right_(right),
      cfg_(cfg),
      noise_(NoiseModel::from_pixel_noise(cfg.sigma_px, left, right)),
      rng_(cfg.seed),
      buffer_(cfg.grid, left.width, left.height),
      estimate_(prior) {
  cfg_.optimizer.pixel_scale = pixel_scale_for(left, right);
  cfg_.rejection.pixel_scale = cfg_.optimizer.pixel_scale;
  cfg_.validate();
  prior.validate();
}

void CalibrationSession::process_frame(std::span<const PixelMatch> frame) {
  if (terminated_) return;
  ++frames_processed_;
  diagnostics_.matches_in += frame.size();
  if (frame.empty()) {
    ++diagnostics_.empty_frames;
    return;
  }

  std::vector<PixelMatch> scored;
  scored.reserve(frame.size());
  for (const PixelMatch& m : frame) {
    if (cfg_.rejection.min_score && m.score && *m.score < *cfg_.rejection.min_score) {
      continue;
    }
    scored.push_back(m);
  }
  diagnostics_.matches_after_score += scored.size();

  const std::vector<PixelMatch> gated =
      prior_gate(estimate_, left_, right_, scored, cfg_.rejection.prior_gate_px);
  diagnostics_.matches_after_gate += gated.size();

  if (gated.size() >= 8) {
    std::vector<NormalizedMatch> normalized;
    normalized.reserve(gated.size());
    for (const PixelMatch& m : gated) {
      normalized.push_back(normalize_match(left_, right_, m));
    }
    try {
      RansacResult ransac = ransac_essential(normalized, cfg_.rejection, rng_);
      diagnostics_.matches_after_ransac += ransac.inliers.size();
      if (ransac.low_consensus) ++diagnostics_.low_consensus_frames;
      buffer_.insert(ransac.inliers, rng_);
    } catch (const Error& e) {
      ++diagnostics_.ransac_skipped_frames;
      diagnostics_.last_error = e.what();
    }
  } else {
    ++diagnostics_.ransac_skipped_frames;
  }

  if (frames_processed_ % static_cast<std::size_t>(cfg_.optimize_every) == 0) {
    run_optimization();
  }
}

void CalibrationSession::run_optimization() {
  const std::vector<NormalizedMatch> snapshot = buffer_.snapshot();
  try {
    OptimizationResult result = optimize(estimate_, snapshot, cfg_.optimizer, noise_);
    estimate_ = result.estimate;

    const TangentBasis basis = finding_bases(estimate_.t);
    const EssentialMatrix E = essential_from(estimate_);
    const auto n = static_cast<Eigen::Index>(snapshot.size());
    if (cfg_.use_approx_covariance) {
      double mean_cov = 0.0;
      for (const NormalizedMatch& m : snapshot) {
        mean_cov += residual_covariance(E, m, noise_);
      }
      mean_cov = std::max(mean_cov / static_cast<double>(snapshot.size()), 1e-300);
      covariance_ = approx_covariance(result.huber_normal_matrix, mean_cov);
    } else {
      MatrixX5d J(n, 5);
      Eigen::VectorXd covs(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        J.row(i) = residual_and_jacobian(estimate_, basis, snapshot[i]).J.transpose();
        covs[i] = residual_covariance(E, snapshot[i], noise_) + 1e-12;
      }
      covariance_ = full_covariance(J, covs);
    }
    terminated_ = convergence_check(covariance_, cfg_.convergence_threshold);
    last_optimization_ = std::move(result);
  } catch (const Error& e) {
    ++diagnostics_.optimization_failures;
    diagnostics_.last_error = e.what();
  }
}

double CalibrationSession::buffer_rms_epipolar_px() const {
  const std::vector<NormalizedMatch> snapshot = buffer_.snapshot();
  if (snapshot.empty()) return 0.0;
  const Eigen::Matrix3d F = fundamental_from(left_, right_, essential_from(estimate_));
  double ss = 0.0;
  std::size_t counted = 0;
  for (const NormalizedMatch& m : snapshot) {
    if (const std::optional<double> d = pixel_epipolar_distance(F, m.pixel)) {
      ss += *d * *d;
      ++counted;
    }
  }
  return counted == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(counted));
}

}  // namespace stereocal
