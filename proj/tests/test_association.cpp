#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "fusetrack/association.hpp"

using namespace fusetrack;

namespace {

// Exhaustive assignment minimum over all one-to-one matchings of size
// min(rows, cols).
double brute_force_min(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  if (rows <= cols) {
    std::vector<int> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (int i = 0; i < rows; ++i) total += cost(i, perm[i]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<int> perm(rows);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (int j = 0; j < cols; ++j) total += cost(perm[j], j);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return best;
}

}  // namespace

TEST_CASE("cost matrix applies the weighted sum") {
  AssociationConfig cfg;
  cfg.w = 0.8;
  cfg.position_gate = 100.0;
  Eigen::MatrixXd d_pos(1, 1), d_app(1, 1);
  d_pos << 2.0;
  d_app << 0.5;
  const CostMatrix c = build_cost_matrix(d_pos, d_app, cfg);
  CHECK(c(0, 0) == doctest::Approx(0.8 * 0.5 + 0.2 * 2.0));
}

TEST_CASE("low appearance distance forces zero cost regardless of position") {
  AssociationConfig cfg;
  Eigen::MatrixXd d_pos(1, 1), d_app(1, 1);
  d_pos << 100.0;
  d_app << cfg.thr_low / 2.0;
  const CostMatrix c = build_cost_matrix(d_pos, d_app, cfg);
  CHECK(c(0, 0) == 0.0);
}

TEST_CASE("high appearance distance forces the sentinel cost") {
  AssociationConfig cfg;
  Eigen::MatrixXd d_pos(1, 1), d_app(1, 1);
  d_pos << 0.01;
  d_app << cfg.thr_high * 2.0;
  const CostMatrix c = build_cost_matrix(d_pos, d_app, cfg);
  CHECK(c(0, 0) == cfg.max_cost);
}

TEST_CASE("position gate blocks distant pairs") {
  AssociationConfig cfg;
  cfg.position_gate = 1.5;
  Eigen::MatrixXd d_pos(1, 2);
  d_pos << 1.2, 1.8;
  const CostMatrix c = build_cost_matrix(d_pos, std::nullopt, cfg);
  CHECK(c(0, 0) == doctest::Approx(1.2));
  CHECK(c(0, 1) == cfg.max_cost);
}

TEST_CASE("NaN appearance entries fall back to pure position") {
  AssociationConfig cfg;
  cfg.position_gate = 5.0;
  Eigen::MatrixXd d_pos(1, 2), d_app(1, 2);
  d_pos << 1.0, 2.0;
  d_app << std::numeric_limits<double>::quiet_NaN(), 0.5;
  const CostMatrix c = build_cost_matrix(d_pos, d_app, cfg);
  CHECK(c(0, 0) == doctest::Approx(1.0));
  CHECK(c(0, 1) == doctest::Approx(0.8 * 0.5 + 0.2 * 2.0));
}

TEST_CASE("hungarian picks the zero diagonal") {
  Eigen::MatrixXd c(2, 2);
  c << 0, 1, 1, 0;
  const Assignment a = hungarian_solve(c);
  REQUIRE(a.matches.size() == 2);
  CHECK(a.matched_cost == doctest::Approx(0.0));
  for (const auto& [det, trk] : a.matches) CHECK(det == trk);
}

TEST_CASE("3x3 example matches the enumerated optimum") {
  Eigen::MatrixXd c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const Assignment a = hungarian_solve(c);
  CHECK(a.matched_cost == doctest::Approx(5.0));
  std::vector<int> row_to_col(3, -1);
  for (const auto& [det, trk] : a.matches) row_to_col[det] = static_cast<int>(trk);
  CHECK(row_to_col == std::vector<int>{1, 0, 2});
}

TEST_CASE("rectangular 2x3 example") {
  Eigen::MatrixXd c(2, 3);
  c << 1, 2, 3, 2, 4, 6;
  const Assignment a = hungarian_solve(c);
  CHECK(a.matched_cost == doctest::Approx(4.0));
  std::vector<int> row_to_col(2, -1);
  for (const auto& [det, trk] : a.matches) row_to_col[det] = static_cast<int>(trk);
  CHECK(row_to_col == std::vector<int>{1, 0});
  REQUIRE(a.unmatched_tracks.size() == 1);
  CHECK(a.unmatched_tracks[0] == 2);
}

TEST_CASE("empty matrices leave everything unmatched") {
  const Assignment a = hungarian_solve(Eigen::MatrixXd(0, 3));
  CHECK(a.matches.empty());
  CHECK(a.unmatched_tracks.size() == 3);
  const Assignment b = hungarian_solve(Eigen::MatrixXd(2, 0));
  CHECK(b.matches.empty());
  CHECK(b.unmatched_detections.size() == 2);
}

TEST_CASE("optimal cost equals brute force on random matrices") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 7);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = dim(rng);
    const int cols = dim(rng);
    Eigen::MatrixXd c(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) c(i, j) = val(rng);
    const Assignment a = hungarian_solve(c);
    REQUIRE(a.matches.size() == static_cast<std::size_t>(std::min(rows, cols)));
    REQUIRE(a.matched_cost == doctest::Approx(brute_force_min(c)).epsilon(1e-12));
  }
}

TEST_CASE("permuting rows and columns permutes the assignment") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  Eigen::MatrixXd c(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) c(i, j) = val(rng);

  std::vector<int> rp{3, 0, 4, 1, 2};
  std::vector<int> cp{2, 4, 0, 3, 1};
  Eigen::MatrixXd shuffled(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) shuffled(i, j) = c(rp[i], cp[j]);

  const Assignment a = hungarian_solve(c);
  const Assignment b = hungarian_solve(shuffled);
  CHECK(a.matched_cost == doctest::Approx(b.matched_cost).epsilon(1e-12));

  std::vector<int> map_a(5, -1);
  for (const auto& [d, t] : a.matches) map_a[d] = static_cast<int>(t);
  for (const auto& [d, t] : b.matches) {
    CHECK(map_a[rp[d]] == cp[t]);
  }
}

TEST_CASE("gated pairs are demoted to unmatched") {
  AssociationConfig cfg;
  Eigen::MatrixXd d_pos(2, 2);
  d_pos << 0.2, 10.0, 10.0, 20.0;
  cfg.position_gate = 1.0;
  const CostMatrix c = build_cost_matrix(d_pos, std::nullopt, cfg);
  const Assignment a = hungarian_solve(c, cfg.max_cost);
  REQUIRE(a.matches.size() == 1);
  CHECK(a.matches[0].first == 0);
  CHECK(a.matches[0].second == 0);
  CHECK(a.unmatched_detections == std::vector<std::size_t>{1});
  CHECK(a.unmatched_tracks == std::vector<std::size_t>{1});
  for (const auto& [d, t] : a.matches) CHECK(c(d, t) < cfg.max_cost);
}
