#include "stereocal/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "stereocal/errors.hpp"
#include "stereocal/geometry.hpp"

namespace stereocal {

namespace {
constexpr double kWeightEpsilon = 1e-12;
constexpr double kDampingCap = 1e-3;
}  // namespace

void OptimizerConfig::validate() const {
  if (!(huber_threshold_px > 0.0) || !(step_tolerance > 0.0) || !(pixel_scale > 0.0)) {
    throw Error(errc::invalid_input, "optimizer config: thresholds must be positive");
  }
  if (max_iterations < 1 || min_matches < 10 || damping < 0.0) {
    throw Error(errc::invalid_input, "optimizer config: invalid iteration or damping settings");
  }
}

double pixel_scale_for(const CameraIntrinsics& left, const CameraIntrinsics& right) {
  return std::min(std::min(left.fx, left.fy), std::min(right.fx, right.fy));
}

ResidualRow residual_and_jacobian(const ExtrinsicEstimate& ext, const TangentBasis& basis,
                                  const NormalizedMatch& m) {
  const Eigen::Matrix3d tx = skew(ext.t);
  const Eigen::Vector3d Rf = ext.R * m.f;

  ResidualRow row;
  row.r = m.f_prime.dot(tx * Rf);
  const Eigen::RowVector3d d_theta = -(m.f_prime.transpose() * tx * ext.R) * skew(m.f);
  row.J.head<3>() = d_theta.transpose();
  row.J[3] = m.f_prime.dot(basis.b1.cross(Rf));
  row.J[4] = m.f_prime.dot(basis.b2.cross(Rf));
  return row;
}

double huber_weight(double r, double c_t) {
  if (!(c_t > 0.0)) {
    throw Error(errc::invalid_input, "huber_weight: threshold must be positive");
  }
  const double a = std::abs(r);
  return a <= c_t ? 1.0 : c_t / a;
}

double normalization_weight(const ExtrinsicEstimate& ext, const NormalizedMatch& m,
                            const NoiseModel& noise) {
  const double cov = residual_covariance(essential_from(ext), m, noise);
  return 1.0 / std::sqrt(cov + kWeightEpsilon);
}

namespace {

struct Row {
  double r;
  double w;       // combined weight
  double w_h;     // Huber-only weight
  double dist2;   // squared normalized point-to-line distance
  Vector5d J;
};

// Strict total order on the row values; equal rows compare equal, so any
// input permutation collapses to the same accumulation sequence.
bool row_less(const Row& a, const Row& b) {
  if (a.r != b.r) return a.r < b.r;
  if (a.w != b.w) return a.w < b.w;
  for (int i = 0; i < 5; ++i) {
    if (a.J[i] != b.J[i]) return a.J[i] < b.J[i];
  }
  return false;
}

}  // namespace

NormalEquations assemble(const ExtrinsicEstimate& ext, const TangentBasis& basis,
                         std::span<const NormalizedMatch> matches,
                         const OptimizerConfig& cfg, const NoiseModel& noise) {
  cfg.validate();
  if (matches.size() < static_cast<std::size_t>(cfg.min_matches)) {
    throw Error(errc::insufficient_data, "assemble: fewer matches than cfg.min_matches");
  }

  const EssentialMatrix E = essential_from(ext);
  const double c_t = cfg.huber_threshold_normalized();

  std::vector<Row> rows;
  rows.reserve(matches.size());
  for (const NormalizedMatch& m : matches) {
    Row row;
    ResidualRow rj = residual_and_jacobian(ext, basis, m);
    row.r = rj.r;
    row.J = rj.J;
    const double cov = residual_covariance(E, m, noise);
    const double w_n = 1.0 / std::sqrt(cov + kWeightEpsilon);
    row.w_h = huber_weight(row.r, c_t);
    row.w = w_n * row.w_h;

    const Eigen::Vector3d line = E.E * m.f;
    const double line_norm2 = line.x() * line.x() + line.y() * line.y();
    row.dist2 = line_norm2 > 0.0 ? (row.r * row.r) / line_norm2 : 0.0;
    rows.push_back(row);
  }

  std::sort(rows.begin(), rows.end(), row_less);

  NormalEquations eq;
  eq.count = rows.size();
  double ssr = 0.0;
  double ssd = 0.0;
  for (const Row& row : rows) {
    eq.JtWJ.noalias() += row.w * (row.J * row.J.transpose());
    eq.JtWr.noalias() += (row.w * row.r) * row.J;
    eq.JtWhJ.noalias() += row.w_h * (row.J * row.J.transpose());
    eq.cost += row.w * row.r * row.r;
    ssr += row.r * row.r;
    ssd += row.dist2;
  }
  const double n = static_cast<double>(rows.size());
  eq.rms_normalized = std::sqrt(ssr / n);
  eq.rms_px = cfg.pixel_scale * std::sqrt(ssd / n);
  return eq;
}

ErrorState solve_step(const Matrix5d& JtWJ, const Vector5d& JtWr, double damping) {
  if (!JtWJ.allFinite() || !JtWr.allFinite() || damping < 0.0) {
    throw Error(errc::invalid_input, "solve_step: inputs must be finite, damping >= 0");
  }
  double lambda = damping;
  while (true) {
    const Matrix5d H = JtWJ + lambda * Matrix5d::Identity();
    Eigen::LLT<Matrix5d> llt(H);
    if (llt.info() == Eigen::Success) {
      const Vector5d delta = llt.solve(-JtWr);
      if (delta.allFinite()) {
        return ErrorState::from_vector(delta);
      }
    }
    if (lambda >= kDampingCap) {
      throw Error(errc::degenerate_geometry,
                  "solve_step: normal equations singular after damping escalation");
    }
    lambda = lambda == 0.0 ? 1e-9 : std::min(lambda * 10.0, kDampingCap);
  }
}

OptimizationResult optimize(const ExtrinsicEstimate& prior,
                            std::span<const NormalizedMatch> matches,
                            const OptimizerConfig& cfg, const NoiseModel& noise) {
  cfg.validate();
  prior.validate();
  if (matches.size() < static_cast<std::size_t>(cfg.min_matches)) {
    throw Error(errc::insufficient_data, "optimize: fewer matches than cfg.min_matches");
  }

  OptimizationResult res;
  res.estimate = prior;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const TangentBasis basis = finding_bases(res.estimate.t);
    const NormalEquations eq = assemble(res.estimate, basis, matches, cfg, noise);
    if (it == 1) {
      res.initial_cost = eq.cost;
    } else {
      res.trace[it - 2].cost = eq.cost;  // cost at the previous iterate
    }

    ErrorState step;
    try {
      step = solve_step(eq.JtWJ, eq.JtWr, cfg.damping);
    } catch (const Error& e) {
      if (e.code() == errc::degenerate_geometry) {
        throw DegenerateGeometryError(res.estimate, e.what());
      }
      throw;
    }

    res.estimate = retract(res.estimate, basis, step);
    res.iterations = it;
    res.trace.push_back({res.estimate, step.inf_norm(), 0.0});
    if (step.inf_norm() < cfg.step_tolerance) {
      res.converged = true;
      break;
    }
  }

  // Evaluate statistics and the normal matrix at the final estimate so the
  // covariance refers to the reported solution.
  const TangentBasis basis = finding_bases(res.estimate.t);
  const NormalEquations eq = assemble(res.estimate, basis, matches, cfg, noise);
  if (!res.trace.empty()) {
    res.trace.back().cost = eq.cost;
  }
  res.normal_matrix = eq.JtWJ;
  res.huber_normal_matrix = eq.JtWhJ;
  res.final_rms_normalized = eq.rms_normalized;
  res.final_rms_px = eq.rms_px;
  return res;
}

}  // namespace stereocal
