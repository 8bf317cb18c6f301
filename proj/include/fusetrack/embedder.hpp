#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fusetrack/appearance.hpp"

namespace fusetrack {

struct InsufficientIdentities : std::runtime_error {
  InsufficientIdentities()
      : std::runtime_error("training needs >= 2 identities with >= 2 samples each") {}
};

// Feature vectors with integer identity labels.
struct LabeledDataset {
  Eigen::MatrixXd features;  // one sample per row
  std::vector<int> labels;

  int num_identities() const;
};

// Two-layer feed-forward embedder producing L2-normalized embeddings, plus a
// classification head used only during training.
struct EmbedderParams {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  Embedding embed(const Eigen::VectorXd& features) const;

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& theta);
  Eigen::Index param_count() const;
};

struct EmbedderTrainConfig {
  int hidden = 64;
  int embed_dim = 128;
  double margin_alpha = 0.2;
  double lambda = 0.1;
  double learning_rate = 0.05;
  int steps = 4000;
  int batch = 16;
  double holdout_fraction = 0.3;
};

struct TrainedEmbedder {
  EmbedderParams params;
  double threshold = 0.0;          // Euclidean distance, grid-calibrated
  double holdout_accuracy = 0.0;   // verification accuracy at `threshold`
};

// Combined objective: triplet loss on the embeddings plus lambda times the
// softmax losses of anchor, positive and negative through the head.
double embedder_total_loss(const EmbedderParams& params, const Eigen::VectorXd& xa,
                           const Eigen::VectorXd& xp, const Eigen::VectorXd& xn,
                           int ya, int yp, int yn, const LossConfig& cfg);

// Analytic gradient of embedder_total_loss w.r.t. every parameter, flattened
// in the same order as EmbedderParams::flatten.
Eigen::VectorXd embedder_total_gradient(const EmbedderParams& params,
                                        const Eigen::VectorXd& xa, const Eigen::VectorXd& xp,
                                        const Eigen::VectorXd& xn, int ya, int yp, int yn,
                                        const LossConfig& cfg);

// Plain gradient descent over randomly sampled triplets; deterministic for a
// fixed seed. Calibrates the verification threshold by grid search on a
// held-out split (0.01 steps over [0, 2]).
TrainedEmbedder train_embedder(const LabeledDataset& dataset, const EmbedderTrainConfig& cfg,
                               std::uint64_t seed);

std::string embedder_to_json(const TrainedEmbedder& e);
TrainedEmbedder embedder_from_json(const std::string& text);

}  // namespace fusetrack
