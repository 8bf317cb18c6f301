#include "fusetrack/track_manager.hpp"

#include <algorithm>
#include <limits>

namespace fusetrack {

double visibility_score(const Track& t) {
  return 100.0 * static_cast<double>(t.visible) / static_cast<double>(t.age);
}

bool should_delete(const Track& t, const TrackLifecycleConfig& cfg) {
  if (t.invisible >= cfg.max_invisible) return true;
  if (t.age >= cfg.min_age_for_score && visibility_score(t) < cfg.min_visibility_pct) {
    return true;
  }
  return false;
}

double gallery_distance(const Track& t, const EmbeddingVec& embedding) {
  if (t.gallery.empty()) throw EmptyGallery{};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : t.gallery) {
    best = std::min(best, 1.0 - g.dot(embedding));
  }
  return best;
}

namespace {

void push_gallery(Track& t, const EmbeddingVec& e, int cap) {
  const double n = e.norm();
  if (n <= 0.0) return;
  t.gallery.push_back(e / n);
  if (t.gallery.size() > static_cast<std::size_t>(cap)) {
    t.gallery.erase(t.gallery.begin());
  }
}

}  // namespace

TrackManager::TrackManager(TrackManagerConfig cfg, PredictorFactory factory)
    : cfg_(std::move(cfg)), factory_(std::move(factory)) {}

TrackerFrameResult TrackManager::step(const std::vector<Detection>& detections, double dt) {
  TrackerFrameResult result;
  const Eigen::Index n_det = static_cast<Eigen::Index>(detections.size());
  const Eigen::Index n_trk = static_cast<Eigen::Index>(tracks_.size());

  std::vector<Vec2> predicted(n_trk);
  for (Eigen::Index j = 0; j < n_trk; ++j) {
    predicted[j] = tracks_[j].predictor->predict_next(dt);
  }

  Eigen::MatrixXd d_pos(n_det, n_trk);
  std::optional<Eigen::MatrixXd> d_app;
  if (cfg_.use_appearance) {
    d_app.emplace(Eigen::MatrixXd::Constant(n_det, n_trk,
                                            std::numeric_limits<double>::quiet_NaN()));
  }
  for (Eigen::Index i = 0; i < n_det; ++i) {
    for (Eigen::Index j = 0; j < n_trk; ++j) {
      d_pos(i, j) = (detections[i].position - predicted[j]).norm();
      if (d_app && detections[i].embedding && !tracks_[j].gallery.empty()) {
        (*d_app)(i, j) = gallery_distance(tracks_[j], *detections[i].embedding);
      }
    }
  }

  const CostMatrix cost = build_cost_matrix(d_pos, d_app, cfg_.assoc);
  const Assignment assignment = hungarian_solve(cost, cfg_.assoc.max_cost);

  for (const auto& [i, j] : assignment.matches) {
    Track& t = tracks_[j];
    const Detection& det = detections[i];
    t.predictor->observe(det.position, dt);
    t.current_position = t.predictor->current();
    t.observations.push_back(det.position);
    t.visible += 1;
    t.invisible = 0;
    t.consecutive += 1;
    if (t.consecutive >= cfg_.lifecycle.reliable_after) t.reliable = true;
    if (det.embedding) push_gallery(t, *det.embedding, cfg_.lifecycle.gallery_size);
    t.last_source = det.source;
  }
  for (std::size_t j : assignment.unmatched_tracks) {
    Track& t = tracks_[j];
    t.predictor->coast(dt);
    t.current_position = t.predictor->current();
    t.invisible += 1;
    t.consecutive = 0;
  }
  for (Track& t : tracks_) t.age += 1;

  for (std::size_t i : assignment.unmatched_detections) {
    const Detection& det = detections[i];
    Track t;
    t.id = next_id_++;
    t.current_position = det.position;
    t.last_source = det.source;
    t.predictor = factory_(det.position);
    t.observations.push_back(det.position);
    if (t.consecutive >= cfg_.lifecycle.reliable_after) t.reliable = true;
    if (det.embedding) push_gallery(t, *det.embedding, cfg_.lifecycle.gallery_size);
    result.born.push_back(t.id);
    tracks_.push_back(std::move(t));
  }

  auto dead_it = std::stable_partition(
      tracks_.begin(), tracks_.end(),
      [&](const Track& t) { return !should_delete(t, cfg_.lifecycle); });
  for (auto it = dead_it; it != tracks_.end(); ++it) result.dead.push_back(it->id);
  tracks_.erase(dead_it, tracks_.end());

  const bool cold_start = frame_index_ < cfg_.lifecycle.reliable_after;
  for (Track& t : tracks_) {
    t.trail.push_back(t.current_position);
    if (t.reliable || cold_start) {
      result.exported.push_back({t.id, t.current_position, t.last_source});
    }
  }
  frame_index_ += 1;
  return result;
}

}  // namespace fusetrack
