#include "stereocal/selfcheck.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "stereocal/geometry.hpp"
#include "stereocal/optimizer.hpp"
#include "stereocal/random.hpp"

namespace stereocal {

Vector5d finite_difference_jacobian(const ExtrinsicEstimate& ext, const TangentBasis& basis,
                                    const NormalizedMatch& m, double step) {
  Vector5d J;
  for (int k = 0; k < 5; ++k) {
    Vector5d delta = Vector5d::Zero();
    delta[k] = step;
    const ExtrinsicEstimate plus = retract(ext, basis, ErrorState::from_vector(delta));
    delta[k] = -step;
    const ExtrinsicEstimate minus = retract(ext, basis, ErrorState::from_vector(delta));
    const double r_plus = epipolar_residual(essential_from(plus), m);
    const double r_minus = epipolar_residual(essential_from(minus), m);
    J[k] = (r_plus - r_minus) / (2.0 * step);
  }
  return J;
}

double power_method_lambda_max(const Matrix5d& m, int iterations) {
  Vector5d v = Vector5d::Ones() / std::sqrt(5.0);
  double rayleigh = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Vector5d w = m * v;
    const double norm = w.norm();
    if (!(norm > 0.0)) return 0.0;
    v = w / norm;
    rayleigh = v.dot(m * v);
  }
  return rayleigh;
}

namespace {

ExtrinsicEstimate random_extrinsic(RandomEngine& rng) {
  const Eigen::Vector3d axis_angle(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                   rng.uniform(-1.0, 1.0));
  Eigen::Vector3d t(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  while (t.norm() < 1e-3) {
    t = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  }
  ExtrinsicEstimate ext;
  ext.R = exp_map(axis_angle);
  ext.t = t.normalized();
  ext.baseline_length = rng.uniform(0.05, 0.5);
  return ext;
}

NormalizedMatch random_match(RandomEngine& rng) {
  NormalizedMatch m;
  m.f = {rng.uniform(-1.4, 1.4), rng.uniform(-1.05, 1.05), 1.0};
  m.f_prime = {rng.uniform(-1.4, 1.4), rng.uniform(-1.05, 1.05), 1.0};
  return m;
}

}  // namespace

bool SelfCheckReport::all_passed() const {
  return std::all_of(items.begin(), items.end(),
                     [](const SelfCheckItem& i) { return i.passed; });
}

SelfCheckReport run_selfcheck(std::uint64_t seed, int jacobian_trials, int eigen_trials) {
  SelfCheckReport report;
  RandomEngine rng(seed);

  {
    SelfCheckItem item;
    item.name = "jacobian vs central finite differences";
    item.bound = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < jacobian_trials; ++i) {
      const ExtrinsicEstimate ext = random_extrinsic(rng);
      const TangentBasis basis = finding_bases(ext.t);
      const NormalizedMatch m = random_match(rng);
      const Vector5d analytic = residual_and_jacobian(ext, basis, m).J;
      const Vector5d fd = finite_difference_jacobian(ext, basis, m, 1e-6);
      const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
      worst = std::max(worst, (analytic - fd).cwiseAbs().maxCoeff() / scale);
    }
    item.worst = worst;
    item.passed = worst < item.bound;
    report.items.push_back(item);
  }

  {
    SelfCheckItem item;
    item.name = "eigen solver vs power method";
    item.bound = 1e-9;
    double worst = 0.0;
    for (int i = 0; i < eigen_trials; ++i) {
      Matrix5d A;
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) {
          A(r, c) = rng.uniform(-1.0, 1.0);
        }
      }
      const Matrix5d spd = A * A.transpose() + 1e-3 * Matrix5d::Identity();
      Eigen::SelfAdjointEigenSolver<Matrix5d> eig(spd, Eigen::EigenvaluesOnly);
      const double closed = eig.eigenvalues().maxCoeff();
      const double power = power_method_lambda_max(spd, 200);
      worst = std::max(worst, std::abs(closed - power) / closed);
    }
    item.worst = worst;
    item.passed = worst < item.bound;
    report.items.push_back(item);
  }

  return report;
}

}  // namespace stereocal
