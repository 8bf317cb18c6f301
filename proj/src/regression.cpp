#include "fusetrack/regression.hpp"

#include <cmath>

namespace fusetrack {

RegressionReport regression_metrics(const std::vector<Vec2>& pred,
                                    const std::vector<Vec2>& truth) {
  if (pred.size() != truth.size() || truth.size() < 2) {
    throw std::invalid_argument("regression_metrics needs equal lengths >= 2");
  }
  const double n = static_cast<double>(truth.size());
  Vec2 mean = Vec2::Zero();
  for (const auto& t : truth) mean += t;
  mean /= n;

  double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Vec2 e = pred[i] - truth[i];
    ss_res += e.squaredNorm();
    abs_sum += std::abs(e.x()) + std::abs(e.y());
    ss_tot += (truth[i] - mean).squaredNorm();
  }
  if (ss_tot == 0.0) throw DegenerateTruth{};

  RegressionReport r;
  r.rmse = std::sqrt(ss_res / (2.0 * n));
  r.mae = abs_sum / (2.0 * n);
  r.r_squared = 1.0 - ss_res / ss_tot;
  return r;
}

}  // namespace fusetrack
