#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fusetrack/geometry.hpp"

namespace fusetrack {

struct EmptyDataset : std::runtime_error {
  EmptyDataset() : std::runtime_error("no trajectory long enough to form a training window") {}
};

// One direction's gate parameters. Peepholes (v*) act on the cell state:
// v_i and v_f see c_{t-1}, v_o sees c_t.
struct LstmCellParams {
  Eigen::MatrixXd wi, ui, vi;
  Eigen::MatrixXd wf, uf, vf;
  Eigen::MatrixXd wc, uc;
  Eigen::MatrixXd wo, uo, vo;
  Eigen::VectorXd bi, bf, bc, bo;

  int hidden() const { return static_cast<int>(bi.size()); }
  int input_dim() const { return static_cast<int>(wi.cols()); }
};

struct LstmParams {
  LstmCellParams fwd, bwd;
  Eigen::MatrixXd head_w;  // 2 x (2*hidden)
  Eigen::VectorXd head_b;  // 2
  int window = 3;
  bool peephole = true;
  // inputs: (p - norm_offset) / norm_scale; predictions inverted on the way out
  Vec2 norm_scale = Vec2::Ones();
  Vec2 norm_offset = Vec2::Zero();

  int hidden() const { return fwd.hidden(); }
};

struct LstmStep {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

LstmStep lstm_cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                        const Eigen::VectorXd& c_prev, const LstmCellParams& cell,
                        bool peephole = true);

// Predict the next 2D position from the last `window` positions. Windows
// shorter than `params.window` are padded by repeating the oldest entry.
Vec2 bilstm_forward(const std::vector<Vec2>& window, const LstmParams& params);

struct BilstmTrainConfig {
  int hidden = 16;
  int window = 3;
  int epochs = 400;
  double learning_rate = 0.5;
  bool peephole = true;
  Vec2 norm_scale = Vec2::Ones();
  Vec2 norm_offset = Vec2::Zero();
  // Also train on repeat-padded short windows, the shape every track presents
  // right after birth.
  bool birth_augmentation = true;
};

struct BilstmTrainResult {
  LstmParams params;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Full-batch gradient descent on mean squared next-position error over all
// sliding windows of the trajectories. Deterministic for a fixed seed.
BilstmTrainResult train_bilstm(const std::vector<std::vector<Vec2>>& trajectories,
                               const BilstmTrainConfig& cfg, std::uint64_t seed);

// Mean window loss and its analytic gradient, flattened in lstm_flatten
// order. Positions are raw; normalization is applied internally.
double bilstm_loss(const LstmParams& params, const std::vector<std::vector<Vec2>>& windows,
                   const std::vector<Vec2>& targets);
std::pair<double, Eigen::VectorXd> bilstm_loss_and_gradient(
    const LstmParams& params, const std::vector<std::vector<Vec2>>& windows,
    const std::vector<Vec2>& targets);

Eigen::VectorXd lstm_flatten(const LstmParams& params);
void lstm_unflatten(LstmParams& params, const Eigen::VectorXd& theta);

LstmParams lstm_init(const BilstmTrainConfig& cfg, std::uint64_t seed);

std::string lstm_to_json(const LstmParams& params);
LstmParams lstm_from_json(const std::string& text);

}  // namespace fusetrack
