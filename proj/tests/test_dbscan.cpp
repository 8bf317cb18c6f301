#include <doctest.h>

#include <random>

#include "fusetrack/dbscan.hpp"

using namespace fusetrack;

namespace {

// Textbook reference DBSCAN with brute-force O(n^2) region queries, written
// against the published pseudocode rather than the production code path.
DbscanResult naive_dbscan(const std::vector<RadarPoint>& pts, double eps, int min_pts) {
  const int n = static_cast<int>(pts.size());
  auto region = [&](int p) {
    std::vector<int> out;
    for (int q = 0; q < n; ++q) {
      const double dx = pts[p].x - pts[q].x;
      const double dy = pts[p].y - pts[q].y;
      if (dx * dx + dy * dy <= eps * eps) out.push_back(q);
    }
    return out;
  };
  std::vector<int> label(n, -2);  // -2 unvisited, -1 noise
  int cluster = 0;
  for (int p = 0; p < n; ++p) {
    if (label[p] != -2) continue;
    auto neighbors = region(p);
    if (static_cast<int>(neighbors.size()) < min_pts) {
      label[p] = -1;
      continue;
    }
    label[p] = cluster;
    std::vector<int> seeds = neighbors;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const int q = seeds[k];
      if (label[q] == -1) label[q] = cluster;
      if (label[q] != -2) continue;
      label[q] = cluster;
      auto nq = region(q);
      if (static_cast<int>(nq.size()) >= min_pts) {
        seeds.insert(seeds.end(), nq.begin(), nq.end());
      }
    }
    ++cluster;
  }
  DbscanResult out;
  out.clusters.resize(cluster);
  for (int p = 0; p < n; ++p) {
    if (label[p] < 0) {
      out.noise.push_back(p);
    } else {
      out.clusters[label[p]].member_indices.push_back(p);
    }
  }
  for (auto& c : out.clusters) {
    Vec2 sum = Vec2::Zero();
    for (auto i : c.member_indices) sum += Vec2(pts[i].x, pts[i].y);
    c.centroid = sum / static_cast<double>(c.member_indices.size());
  }
  return out;
}

std::vector<RadarPoint> random_points(std::mt19937_64& rng, int n, double span) {
  std::uniform_real_distribution<double> d(-span, span);
  std::vector<RadarPoint> pts;
  for (int i = 0; i < n; ++i) pts.push_back({d(rng), d(rng), 0.0});
  return pts;
}

bool same_memberships(const DbscanResult& a, const DbscanResult& b) {
  if (a.noise != b.noise) return false;
  if (a.clusters.size() != b.clusters.size()) return false;
  for (std::size_t c = 0; c < a.clusters.size(); ++c) {
    if (a.clusters[c].member_indices != b.clusters[c].member_indices) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("three nearby points form one cluster with the mean centroid") {
  const std::vector<RadarPoint> pts{{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}};
  const auto r = dbscan(pts, 0.5, 2);
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.noise.empty());
  CHECK(r.clusters[0].centroid.x() == doctest::Approx(0.1 / 3.0).epsilon(1e-6));
  CHECK(r.clusters[0].centroid.y() == doctest::Approx(0.1 / 3.0).epsilon(1e-6));
}

TEST_CASE("a lone point cannot form a core") {
  const auto r = dbscan({{1, 2, 3}}, 0.5, 2);
  CHECK(r.clusters.empty());
  REQUIRE(r.noise.size() == 1);
  CHECK(r.noise[0] == 0);
}

TEST_CASE("well separated groups come out as separate clusters") {
  std::vector<RadarPoint> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({0.05 * i, 0.0, 0.0});
  for (int i = 0; i < 5; ++i) pts.push_back({10.0 + 0.05 * i, 0.0, 0.0});
  const auto r = dbscan(pts, 0.5, 2);
  REQUIRE(r.clusters.size() == 2);
  CHECK(r.clusters[0].centroid.x() == doctest::Approx(0.1));
  CHECK(r.clusters[1].centroid.x() == doctest::Approx(10.1));
  const auto ref = naive_dbscan(pts, 0.5, 2);
  CHECK(same_memberships(r, ref));
}

TEST_CASE("z is ignored for distances") {
  const std::vector<RadarPoint> pts{{0, 0, 0}, {0.1, 0, 100.0}, {0, 0.1, -50.0}};
  const auto r = dbscan(pts, 0.5, 2);
  CHECK(r.clusters.size() == 1);
}

TEST_CASE("empty input yields nothing") {
  const auto r = dbscan({}, 0.5, 3);
  CHECK(r.clusters.empty());
  CHECK(r.noise.empty());
}

TEST_CASE("memberships match the naive reference on random inputs") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> n_dist(0, 200);
  std::uniform_real_distribution<double> eps_dist(0.2, 2.0);
  std::uniform_int_distribution<int> minpts_dist(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = n_dist(rng);
    const auto pts = random_points(rng, n, 5.0);
    const double eps = eps_dist(rng);
    const int min_pts = minpts_dist(rng);
    const auto got = dbscan(pts, eps, min_pts);
    const auto ref = naive_dbscan(pts, eps, min_pts);
    REQUIRE(same_memberships(got, ref));

    // partition: every index exactly once
    std::vector<int> seen(n, 0);
    for (auto i : got.noise) seen[i] += 1;
    for (const auto& c : got.clusters)
      for (auto i : c.member_indices) seen[i] += 1;
    for (int i = 0; i < n; ++i) REQUIRE(seen[i] == 1);
  }
}

TEST_CASE("growing eps never increases the noise count") {
  std::mt19937_64 rng(99);
  const auto pts = random_points(rng, 150, 4.0);
  std::size_t prev_noise = pts.size() + 1;
  for (double eps = 0.1; eps < 2.0; eps += 0.1) {
    const auto r = dbscan(pts, eps, 3);
    CHECK(r.noise.size() <= prev_noise);
    prev_noise = r.noise.size();
  }
}

TEST_CASE("cluster_to_detection passes the centroid through") {
  Cluster c;
  c.member_indices = {0};
  c.centroid = Vec2(1.0, 5.0);
  const Detection d = cluster_to_detection(c);
  CHECK(d.position.x() == doctest::Approx(1.0));
  CHECK(d.position.y() == doctest::Approx(5.0));
  CHECK(!d.embedding.has_value());
  CHECK(d.source == DetectionSource::radar);
}

TEST_CASE("coincident points average to themselves") {
  std::vector<RadarPoint> pts(1000, RadarPoint{2.0, 3.0, 0.0});
  const auto r = dbscan(pts, 0.5, 3);
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.clusters[0].centroid.x() == doctest::Approx(2.0));
  CHECK(r.clusters[0].centroid.y() == doctest::Approx(3.0));
}
