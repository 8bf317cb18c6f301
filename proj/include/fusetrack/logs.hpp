#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fusetrack/clear.hpp"
#include "fusetrack/sim.hpp"

namespace fusetrack {

struct ParseError : std::runtime_error {
  ParseError(const std::string& path, int line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_number(line) {}
  int line_number = 0;
};

// One exported track position: {t, id, x, y, source}.
struct TrackRecord {
  double t = 0.0;
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  std::string source;
};

void write_camera_log(const CameraLog& log, const std::string& path);
void write_radar_log(const RadarLog& log, const std::string& path);
void write_ground_truth_log(const GroundTruthLog& log, const std::string& path);
void write_track_records(const std::vector<TrackRecord>& records, const std::string& path);

CameraLog read_camera_log(const std::string& path);
RadarLog read_radar_log(const std::string& path);
GroundTruthLog read_ground_truth_log(const std::string& path);
std::vector<TrackRecord> read_track_records(const std::string& path);

void write_identity_means(const std::vector<EmbeddingVec>& means, std::uint64_t seed,
                          double sigma, const std::string& path);
std::vector<EmbeddingVec> read_identity_means(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fusetrack
