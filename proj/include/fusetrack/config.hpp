#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "fusetrack/association.hpp"
#include "fusetrack/sim.hpp"
#include "fusetrack/track_manager.hpp"

namespace fusetrack {

struct MissingKey : std::runtime_error {
  explicit MissingKey(const std::string& key)
      : std::runtime_error("missing required config key: " + key), key(key) {}
  std::string key;
};

struct UnknownKey : std::runtime_error {
  UnknownKey(const std::string& key, const std::string& suggestion)
      : std::runtime_error("unknown config key: " + key +
                           (suggestion.empty() ? "" : " (did you mean " + suggestion + "?)")),
        key(key),
        suggestion(suggestion) {}
  std::string key;
  std::string suggestion;
};

struct TypeMismatch : std::runtime_error {
  TypeMismatch(const std::string& key, const std::string& detail)
      : std::runtime_error("bad value for config key " + key + ": " + detail), key(key) {}
  std::string key;
};

struct RunConfig {
  Calibration calibration;

  double dbscan_eps_m = 0.5;
  int dbscan_min_pts = 3;

  double assoc_w = 0.8;
  double assoc_thr_low = 0.3;
  double assoc_thr_high = 1.2;
  double assoc_gate_bev_m = 1.5;
  double assoc_gate_px = 80.0;
  double assoc_max_cost = 1e6;

  TrackLifecycleConfig track;

  std::string motion_model = "kalman";  // kalman | bilstm
  int motion_window = 3;
  int motion_hidden = 16;
  bool motion_peephole = true;
  int motion_epochs = 400;
  double motion_learning_rate = 0.3;
  double motion_bev_norm_m = 10.0;
  std::string motion_params_px;
  std::string motion_params_bev;
  double kalman_q_bev = 1.0;
  double kalman_r_bev = 0.02;
  double kalman_q_px = 10000.0;
  double kalman_r_px = 9.0;
  double kalman_p0_pos_bev = 0.25;
  double kalman_p0_vel_bev = 4.0;
  double kalman_p0_pos_px = 25.0;
  double kalman_p0_vel_px = 10000.0;

  double fusion_gate_m = 1.5;
  double fusion_max_skew_s = 0.05;

  double metrics_gate_m = 1.0;
  std::string metrics_motp_denominator = "gt";  // gt | matches

  bool use_appearance = true;

  double sim_frame_rate = 10.0;
  double sim_walk_speed_mps = 1.4;
  SensorNoiseModel noise;
  double sim_emb_separation = 1.2;

  int embedder_feature_dim = 16;
  int embedder_hidden = 64;
  int embedder_embed_dim = 128;
  double embedder_margin = 0.2;
  double embedder_lambda = 0.1;
  double embedder_learning_rate = 0.05;
  int embedder_steps = 3000;
  int embedder_batch = 16;
  int embedder_identities = 20;
  int embedder_samples_per_identity = 30;
  double embedder_feature_sigma = 1.0;
  double embedder_mean_separation_sigmas = 4.0;

  std::uint64_t seed = 1;

  AssociationConfig assoc_config(bool bev_space) const;
};

// Flat `section.key = value` file; `#` starts a comment. Unknown keys are
// rejected with a nearest-key suggestion, range violations name the key.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin);

// Every key with its resolved value, one per line, registry order.
std::string dump_resolved(const RunConfig& cfg);

// Desk-scale defaults including the reference calibration.
RunConfig default_config();

}  // namespace fusetrack
