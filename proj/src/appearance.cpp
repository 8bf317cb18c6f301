#include "fusetrack/appearance.hpp"

#include <cmath>

namespace fusetrack {

Embedding l2_normalize(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (norm <= 0.0) throw ZeroVector{};
  return Embedding::from_unit(v / norm);
}

double embedding_distance(const Embedding& a, const Embedding& b, DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::euclidean:
      return (a.values() - b.values()).norm();
    case DistanceMetric::cosine:
      return 1.0 - a.values().dot(b.values());
  }
  return 0.0;
}

double triplet_loss_from_distances(double d_ap, double d_an, double margin_alpha) {
  return std::max(0.0, margin_alpha + d_ap - d_an);
}

double triplet_loss(const Triplet& t, const LossConfig& cfg) {
  const double d_ap = (t.anchor.values() - t.positive.values()).squaredNorm();
  const double d_an = (t.anchor.values() - t.negative.values()).squaredNorm();
  return triplet_loss_from_distances(d_ap, d_an, cfg.margin_alpha);
}

double softmax_loss(const Eigen::VectorXd& logits, int label) {
  // log-sum-exp with max shift
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[label];
}

bool same_identity(const Embedding& a, const Embedding& b, double threshold) {
  return embedding_distance(a, b, DistanceMetric::euclidean) < threshold;
}

}  // namespace fusetrack
