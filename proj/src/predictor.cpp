#include "fusetrack/predictor.hpp"

namespace fusetrack {

KalmanPredictor::KalmanPredictor(const Vec2& z0, double q, double r, double p0_pos,
                                 double p0_vel)
    : state_(KalmanState::initial(z0, q, r, p0_pos, p0_vel)) {}

Vec2 KalmanPredictor::predict_next(double dt) const {
  return kalman_predict(state_, dt).position();
}

void KalmanPredictor::observe(const Vec2& z, double dt) {
  state_ = kalman_update(kalman_predict(state_, dt), z);
}

void KalmanPredictor::coast(double dt) { state_ = kalman_predict(state_, dt); }

Vec2 KalmanPredictor::current() const { return state_.position(); }

BilstmPredictor::BilstmPredictor(const Vec2& z0, std::shared_ptr<const LstmParams> params)
    : params_(std::move(params)), current_(z0) {
  window_.push_back(z0);
}

Vec2 BilstmPredictor::predict_next(double /*dt*/) const {
  return bilstm_forward({window_.begin(), window_.end()}, *params_);
}

void BilstmPredictor::observe(const Vec2& z, double /*dt*/) {
  push(z);
  current_ = z;
}

void BilstmPredictor::coast(double dt) {
  const Vec2 p = predict_next(dt);
  push(p);
  current_ = p;
}

Vec2 BilstmPredictor::current() const { return current_; }

void BilstmPredictor::push(const Vec2& p) {
  window_.push_back(p);
  while (window_.size() > static_cast<std::size_t>(params_->window)) window_.pop_front();
}

PredictorFactory make_kalman_factory(const KalmanSettings& settings) {
  return [settings](const Vec2& z0) {
    return std::make_unique<KalmanPredictor>(z0, settings.q, settings.r, settings.p0_pos,
                                             settings.p0_vel);
  };
}

PredictorFactory make_bilstm_factory(std::shared_ptr<const LstmParams> params) {
  return [params](const Vec2& z0) { return std::make_unique<BilstmPredictor>(z0, params); };
}

}  // namespace fusetrack
