#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "fusetrack/association.hpp"
#include "fusetrack/detection.hpp"
#include "fusetrack/predictor.hpp"

namespace fusetrack {

struct EmptyGallery : std::runtime_error {
  EmptyGallery() : std::runtime_error("track has no stored embeddings") {}
};

struct TrackLifecycleConfig {
  int max_invisible = 20;          // I_t threshold
  double min_visibility_pct = 60;  // S_t threshold, strict "falls below"
  int reliable_after = 5;          // consecutive detections for promotion
  int gallery_size = 10;
  int min_age_for_score = 5;       // S_t rule suspended before this age
};

struct Track {
  int id = 0;
  int age = 1;          // A_t: frames since creation
  int invisible = 0;    // I_t: trailing unseen frames
  int visible = 1;      // V_t: successful predict+update count
  int consecutive = 1;  // current run of matched frames
  bool reliable = false;
  Vec2 current_position = Vec2::Zero();
  DetectionSource last_source = DetectionSource::camera;
  std::vector<EmbeddingVec> gallery;   // most recent K embeddings, unit norm
  std::vector<Vec2> observations;      // matched detections only
  std::vector<Vec2> trail;             // per-frame output positions
  std::unique_ptr<MotionPredictor> predictor;
};

double visibility_score(const Track& t);
bool should_delete(const Track& t, const TrackLifecycleConfig& cfg);

// Minimum cosine distance between the query and the gallery.
double gallery_distance(const Track& t, const EmbeddingVec& embedding);

struct TrackManagerConfig {
  TrackLifecycleConfig lifecycle;
  AssociationConfig assoc;
  bool use_appearance = true;
};

struct ExportedTrack {
  int id = 0;
  Vec2 position = Vec2::Zero();
  DetectionSource source = DetectionSource::camera;
};

struct TrackerFrameResult {
  std::vector<ExportedTrack> exported;
  std::vector<int> born;
  std::vector<int> dead;
};

// One tracker instance: association, lifecycle counters, deletion. Frames
// are strictly sequential; distinct instances share nothing.
class TrackManager {
 public:
  TrackManager(TrackManagerConfig cfg, PredictorFactory factory);

  TrackerFrameResult step(const std::vector<Detection>& detections, double dt);

  const std::vector<Track>& tracks() const { return tracks_; }
  int frame_index() const { return frame_index_; }

 private:
  TrackManagerConfig cfg_;
  PredictorFactory factory_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  int frame_index_ = 0;
};

}  // namespace fusetrack
