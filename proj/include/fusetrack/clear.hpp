#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "fusetrack/geometry.hpp"

namespace fusetrack {

struct EmptyGroundTruth : std::runtime_error {
  EmptyGroundTruth() : std::runtime_error("no ground-truth objects to evaluate against") {}
};

struct NoMatches : std::runtime_error {
  NoMatches() : std::runtime_error("no matched pairs; MOTP undefined") {}
};

struct GroundTruthObject {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct GroundTruthFrame {
  double t = 0.0;
  std::vector<GroundTruthObject> objects;  // ids unique within a frame
};

struct HypothesisPoint {
  int id = 0;
  Vec2 position = Vec2::Zero();
};

struct ClearCounts {
  long long fp = 0;
  long long fn = 0;
  long long idsw = 0;
  long long gt_total = 0;
  long long matches = 0;
  double distance_sum = 0.0;
};

struct Rates {
  double fpr = 0.0;
  double fnr = 0.0;
  double idswr = 0.0;
};

enum class MotpDenominator { gt, matches };

struct FrameMatchRecord {
  double t = 0.0;
  int gt_id = 0;
  int hyp_id = 0;
  double distance = 0.0;
};

struct ClearReport {
  ClearCounts counts;
  Rates rates;
  double mota = 0.0;  // percent
  double motp = 0.0;  // meters
  std::vector<FrameMatchRecord> match_records;
};

Rates rates(const ClearCounts& counts);
double mota(const ClearCounts& counts);
double motp(const ClearCounts& counts, MotpDenominator denom = MotpDenominator::gt);

// Frame-by-frame CLEAR correspondence: previous-frame matches persist while
// within the gate, the remainder is matched by Hungarian distance, and a
// ground truth whose hypothesis id differs from its last known one counts as
// an identity switch.
class ClearEvaluator {
 public:
  explicit ClearEvaluator(double gate_m, MotpDenominator denom = MotpDenominator::gt);

  void add_frame(const GroundTruthFrame& gt, const std::vector<HypothesisPoint>& hyps);
  ClearReport report() const;

 private:
  double gate_;
  MotpDenominator denom_;
  ClearCounts counts_;
  std::map<int, int> active_;    // gt id -> hyp id matched in the previous frame
  std::map<int, int> last_hyp_;  // gt id -> last hyp id ever matched
  std::vector<FrameMatchRecord> records_;
};

}  // namespace fusetrack
