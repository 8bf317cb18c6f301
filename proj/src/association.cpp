#include "fusetrack/association.hpp"

#include <cmath>
#include <limits>

namespace fusetrack {

CostMatrix build_cost_matrix(const Eigen::MatrixXd& d_position,
                             const std::optional<Eigen::MatrixXd>& d_appearance,
                             const AssociationConfig& cfg) {
  CostMatrix cost(d_position.rows(), d_position.cols());
  for (Eigen::Index i = 0; i < d_position.rows(); ++i) {
    for (Eigen::Index j = 0; j < d_position.cols(); ++j) {
      const double d_pos = d_position(i, j);
      double d_app = std::numeric_limits<double>::quiet_NaN();
      if (d_appearance) d_app = (*d_appearance)(i, j);
      if (std::isnan(d_app)) {
        cost(i, j) = d_pos > cfg.position_gate ? cfg.max_cost : d_pos;
      } else if (d_app < cfg.thr_low) {
        cost(i, j) = 0.0;  // same object regardless of position
      } else if (d_app > cfg.thr_high) {
        cost(i, j) = cfg.max_cost;  // different object regardless of position
      } else if (d_pos > cfg.position_gate) {
        cost(i, j) = cfg.max_cost;
      } else {
        cost(i, j) = cfg.w * d_app + (1.0 - cfg.w) * d_pos;
      }
    }
  }
  return cost;
}

namespace {

// Jonker-Volgenant style shortest augmenting path solver for square matrices,
// O(n^3). Returns row -> column.
std::vector<int> solve_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment hungarian_solve(const CostMatrix& cost, double max_cost) {
  Assignment out;
  const Eigen::Index rows = cost.rows();
  const Eigen::Index cols = cost.cols();
  if (rows == 0 || cols == 0) {
    for (Eigen::Index i = 0; i < rows; ++i) out.unmatched_detections.push_back(i);
    for (Eigen::Index j = 0; j < cols; ++j) out.unmatched_tracks.push_back(j);
    return out;
  }

  // Pad to square; padding rows/cols cost 0 so they absorb the surplus
  // without disturbing the optimum of the real block.
  const Eigen::Index n = std::max(rows, cols);
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(n, n);
  padded.topLeftCorner(rows, cols) = cost;
  const auto row_to_col = solve_square(padded);

  std::vector<char> det_matched(rows, 0), track_matched(cols, 0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int j = row_to_col[static_cast<int>(i)];
    if (j < 0 || j >= cols) continue;
    if (cost(i, j) >= max_cost) continue;  // gated pair, demote
    out.matches.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    out.matched_cost += cost(i, j);
    det_matched[i] = 1;
    track_matched[j] = 1;
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!det_matched[i]) out.unmatched_detections.push_back(i);
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (!track_matched[j]) out.unmatched_tracks.push_back(j);
  }
  return out;
}

}  // namespace fusetrack
