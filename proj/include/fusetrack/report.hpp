#pragma once

#include <string>
#include <vector>

#include "fusetrack/pipeline.hpp"

namespace fusetrack {

// CLEAR evaluation of exported track records against a ground-truth log.
// Records are grouped by timestamp and matched to GT frames exactly.
ClearReport evaluate_records(const std::vector<TrackRecord>& records,
                             const GroundTruthLog& gt, double gate_m,
                             MotpDenominator denom = MotpDenominator::gt);

struct AblationVariant {
  std::string name;
  bool use_appearance = true;
  std::string motion_model = "kalman";
};

// The four dual-cue/motion-model combinations reported by the engine.
std::vector<AblationVariant> standard_variants();

struct AblationRow {
  std::string variant;
  std::string tracker;  // Cam | Rad | SF
  double fpr = 0.0;
  double fnr = 0.0;
  double idswr = 0.0;
  double mota = 0.0;
  double motp = 0.0;
};

struct ComparisonTable {
  std::vector<AblationRow> rows;
  std::uint64_t seed = 0;
};

ComparisonTable run_ablation(const CameraLog& camera_log, const RadarLog& radar_log,
                             const GroundTruthLog& gt, const RunConfig& base,
                             const std::vector<AblationVariant>& variants,
                             std::shared_ptr<const LstmParams> pixel_params,
                             std::shared_ptr<const LstmParams> bev_params);

std::string table_to_csv(const ComparisonTable& table);
std::string table_to_text(const ComparisonTable& table);

std::string clear_report_to_json(const ClearReport& report);
std::string clear_report_csv_row(const std::string& tracker, const ClearReport& report);

struct TrajectoryPlotData {
  std::vector<TrackRecord> camera, radar, fused;
  GroundTruthLog gt;
};

struct PlotArtifacts {
  std::string svg;
  std::string points_csv;  // tracker,id,t,x,y for every plotted point
  std::string gaps_csv;    // per tracker: GT instants with no nearby track point
};

PlotArtifacts emit_trajectory_plot(const TrajectoryPlotData& data, double gap_radius_m);

// GT instants with no exported point of this tracker within the radius.
long long coverage_gap_count(const std::vector<TrackRecord>& records,
                             const GroundTruthLog& gt, double radius_m);

}  // namespace fusetrack
