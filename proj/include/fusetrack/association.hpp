#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace fusetrack {

struct AssociationConfig {
  double w = 0.8;            // appearance weight in the combined cost
  double thr_low = 0.3;      // appearance distance below which cost is forced to 0
  double thr_high = 1.2;     // appearance distance above which cost is forced to max_cost
  double max_cost = 1e6;     // sentinel larger than any achievable combined cost
  double position_gate = 1.5;
};

using CostMatrix = Eigen::MatrixXd;  // rows = detections, cols = tracks

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (detection, track)
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::size_t> unmatched_tracks;
  double matched_cost = 0.0;
};

// Combined cost per the dual-cue rule. d_appearance may carry NaN where no
// appearance information exists for that pair; those entries use pure
// position distance. The appearance overrides take precedence over the
// position gate.
CostMatrix build_cost_matrix(const Eigen::MatrixXd& d_position,
                             const std::optional<Eigen::MatrixXd>& d_appearance,
                             const AssociationConfig& cfg);

// Globally optimal one-to-one assignment of size min(rows, cols); pairs whose
// entry reaches cfg-level max_cost are demoted to unmatched afterwards.
Assignment hungarian_solve(const CostMatrix& cost, double max_cost = 1e6);

}  // namespace fusetrack
