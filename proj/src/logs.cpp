#include "fusetrack/logs.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fusetrack {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

template <typename Fn>
void for_each_line_json(const std::string& path, Fn&& fn) {
  auto in = open_in(path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      fn(j);
    } catch (const json::exception& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
}

}  // namespace

void write_camera_log(const CameraLog& log, const std::string& path) {
  auto out = open_out(path);
  for (const auto& frame : log.frames) {
    json dets = json::array();
    for (const auto& d : frame.dets) {
      json det;
      det["bbox"] = {d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max};
      det["emb"] = std::vector<double>(d.embedding.data(),
                                       d.embedding.data() + d.embedding.size());
      dets.push_back(std::move(det));
    }
    out << json{{"t", frame.t}, {"dets", dets}}.dump() << "\n";
  }
}

void write_radar_log(const RadarLog& log, const std::string& path) {
  auto out = open_out(path);
  for (const auto& frame : log.frames) {
    json pts = json::array();
    for (const auto& p : frame.points) pts.push_back({p.x, p.y, p.z});
    out << json{{"t", frame.t}, {"points", pts}}.dump() << "\n";
  }
}

void write_ground_truth_log(const GroundTruthLog& log, const std::string& path) {
  auto out = open_out(path);
  for (const auto& frame : log.frames) {
    json objs = json::array();
    for (const auto& o : frame.objects) {
      objs.push_back({{"id", o.id}, {"x", o.x}, {"y", o.y}});
    }
    out << json{{"t", frame.t}, {"objects", objs}}.dump() << "\n";
  }
}

void write_track_records(const std::vector<TrackRecord>& records, const std::string& path) {
  auto out = open_out(path);
  for (const auto& r : records) {
    out << json{{"t", r.t}, {"id", r.id}, {"x", r.x}, {"y", r.y}, {"source", r.source}}.dump()
        << "\n";
  }
}

CameraLog read_camera_log(const std::string& path) {
  CameraLog log;
  for_each_line_json(path, [&](const json& j) {
    CameraFrame frame;
    frame.t = j.at("t").get<double>();
    for (const auto& d : j.at("dets")) {
      CameraDetection det;
      const auto& b = d.at("bbox");
      det.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                  b[3].get<double>()};
      const auto& e = d.at("emb");
      det.embedding.resize(static_cast<Eigen::Index>(e.size()));
      for (Eigen::Index i = 0; i < det.embedding.size(); ++i) {
        det.embedding[i] = e[i].get<double>();
      }
      frame.dets.push_back(std::move(det));
    }
    log.frames.push_back(std::move(frame));
  });
  return log;
}

RadarLog read_radar_log(const std::string& path) {
  RadarLog log;
  for_each_line_json(path, [&](const json& j) {
    RadarFrame frame;
    frame.t = j.at("t").get<double>();
    for (const auto& p : j.at("points")) {
      frame.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    log.frames.push_back(std::move(frame));
  });
  return log;
}

GroundTruthLog read_ground_truth_log(const std::string& path) {
  GroundTruthLog log;
  int max_id = -1;
  for_each_line_json(path, [&](const json& j) {
    GroundTruthFrame frame;
    frame.t = j.at("t").get<double>();
    for (const auto& o : j.at("objects")) {
      GroundTruthObject obj{o.at("id").get<int>(), o.at("x").get<double>(),
                            o.at("y").get<double>()};
      max_id = std::max(max_id, obj.id);
      frame.objects.push_back(obj);
    }
    log.frames.push_back(std::move(frame));
  });
  log.num_objects = max_id + 1;
  return log;
}

std::vector<TrackRecord> read_track_records(const std::string& path) {
  std::vector<TrackRecord> records;
  for_each_line_json(path, [&](const json& j) {
    records.push_back({j.at("t").get<double>(), j.at("id").get<int>(),
                       j.at("x").get<double>(), j.at("y").get<double>(),
                       j.at("source").get<std::string>()});
  });
  return records;
}

void write_identity_means(const std::vector<EmbeddingVec>& means, std::uint64_t seed,
                          double sigma, const std::string& path) {
  json j;
  j["seed"] = seed;
  j["sigma"] = sigma;
  json arr = json::array();
  for (const auto& m : means) {
    arr.push_back(std::vector<double>(m.data(), m.data() + m.size()));
  }
  j["means"] = std::move(arr);
  write_text_file(path, j.dump(2));
}

std::vector<EmbeddingVec> read_identity_means(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  std::vector<EmbeddingVec> means;
  for (const auto& row : j.at("means")) {
    EmbeddingVec m(static_cast<Eigen::Index>(row.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = row[i].get<double>();
    means.push_back(std::move(m));
  }
  return means;
}

std::string read_text_file(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

}  // namespace fusetrack
