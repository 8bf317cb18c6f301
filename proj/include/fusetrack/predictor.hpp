#pragma once

#include <deque>
#include <functional>
#include <memory>

#include "fusetrack/kalman.hpp"
#include "fusetrack/lstm.hpp"

namespace fusetrack {

// Per-track motion estimator. `predict_next` is the association anchor for
// the upcoming frame and never mutates state; `observe` commits a matched
// detection, `coast` advances without one.
class MotionPredictor {
 public:
  virtual ~MotionPredictor() = default;
  virtual Vec2 predict_next(double dt) const = 0;
  virtual void observe(const Vec2& z, double dt) = 0;
  virtual void coast(double dt) = 0;
  virtual Vec2 current() const = 0;
};

class KalmanPredictor final : public MotionPredictor {
 public:
  KalmanPredictor(const Vec2& z0, double q, double r, double p0_pos, double p0_vel);

  Vec2 predict_next(double dt) const override;
  void observe(const Vec2& z, double dt) override;
  void coast(double dt) override;
  Vec2 current() const override;

 private:
  KalmanState state_;
};

// Sliding-window sequence predictor. Coasting feeds the model's own
// prediction back in as a pseudo-observation so tracks keep moving.
class BilstmPredictor final : public MotionPredictor {
 public:
  BilstmPredictor(const Vec2& z0, std::shared_ptr<const LstmParams> params);

  Vec2 predict_next(double dt) const override;
  void observe(const Vec2& z, double dt) override;
  void coast(double dt) override;
  Vec2 current() const override;

 private:
  void push(const Vec2& p);

  std::shared_ptr<const LstmParams> params_;
  std::deque<Vec2> window_;
  Vec2 current_ = Vec2::Zero();
};

using PredictorFactory = std::function<std::unique_ptr<MotionPredictor>(const Vec2&)>;

struct KalmanSettings {
  double q = 1.0;
  double r = 0.02;
  double p0_pos = 1.0;
  double p0_vel = 100.0;
};

PredictorFactory make_kalman_factory(const KalmanSettings& settings);
PredictorFactory make_bilstm_factory(std::shared_ptr<const LstmParams> params);

}  // namespace fusetrack
