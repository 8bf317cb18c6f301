#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace fusetrack {

struct ZeroVector : std::runtime_error {
  ZeroVector() : std::runtime_error("cannot normalize a zero vector") {}
};

// Unit-norm appearance vector in the learned metric space.
class Embedding {
 public:
  Embedding() = default;
  static Embedding from_unit(Eigen::VectorXd v) { return Embedding(std::move(v)); }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index dim() const { return values_.size(); }

 private:
  explicit Embedding(Eigen::VectorXd v) : values_(std::move(v)) {}
  Eigen::VectorXd values_;
};

enum class DistanceMetric { euclidean, cosine };

Embedding l2_normalize(const Eigen::VectorXd& v);

// For unit vectors: euclidean in [0, 2], cosine = 1 - a.b in [0, 2], and
// euclidean^2 == 2 * cosine.
double embedding_distance(const Embedding& a, const Embedding& b, DistanceMetric metric);

struct LossConfig {
  double margin_alpha = 0.2;  // triplet margin
  double lambda = 0.1;        // softmax trade-off
  int num_classes = 0;
};

struct Triplet {
  Embedding anchor;
  Embedding positive;
  Embedding negative;
};

// max(0, alpha + d(a,p) - d(a,n)) for precomputed distances.
double triplet_loss_from_distances(double d_ap, double d_an, double margin_alpha);

// Triplet loss over embeddings using squared Euclidean distance.
double triplet_loss(const Triplet& t, const LossConfig& cfg);

// Cross-entropy of softmax(logits) against a class label.
double softmax_loss(const Eigen::VectorXd& logits, int label);

// True iff the Euclidean embedding distance is below the threshold.
bool same_identity(const Embedding& a, const Embedding& b, double threshold);

}  // namespace fusetrack
