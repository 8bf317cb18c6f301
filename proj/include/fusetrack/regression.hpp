#pragma once

#include <stdexcept>
#include <vector>

#include "fusetrack/geometry.hpp"

namespace fusetrack {

struct DegenerateTruth : std::runtime_error {
  DegenerateTruth() : std::runtime_error("ground-truth positions have zero variance") {}
};

struct RegressionReport {
  double rmse = 0.0;
  double mae = 0.0;
  double r_squared = 0.0;
};

// Pooled over both coordinates: every x and y value counts as one sample.
// R^2 = 1 - SS_res / SS_tot with per-coordinate means.
RegressionReport regression_metrics(const std::vector<Vec2>& pred,
                                    const std::vector<Vec2>& truth);

}  // namespace fusetrack
