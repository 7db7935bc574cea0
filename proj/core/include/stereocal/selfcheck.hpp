#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stereocal/manifold.hpp"
#include "stereocal/types.hpp"

namespace stereocal {

/// Central finite difference of the epipolar residual through the retraction,
/// independent of the analytic Jacobian path.
Vector5d finite_difference_jacobian(const ExtrinsicEstimate& ext, const TangentBasis& basis,
                                    const NormalizedMatch& m, double step);

/// Largest eigenvalue of a symmetric matrix by plain power iteration.
double power_method_lambda_max(const Matrix5d& m, int iterations);

struct SelfCheckItem {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // worst observed error
  double bound = 0.0;  // tolerance it was checked against
};

struct SelfCheckReport {
  std::vector<SelfCheckItem> items;
  bool all_passed() const;
};

/// Built-in numerical oracles: analytic vs finite-difference Jacobians on
/// random configurations and the closed-form eigen solver vs power iteration.
SelfCheckReport run_selfcheck(std::uint64_t seed = 12345, int jacobian_trials = 1000,
                              int eigen_trials = 100);

}  // namespace stereocal
