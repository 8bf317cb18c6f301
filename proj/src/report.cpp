#include "fusetrack/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

namespace fusetrack {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Track records grouped by timestamp, in time order.
std::vector<std::pair<double, std::vector<HypothesisPoint>>> group_by_time(
    const std::vector<TrackRecord>& records) {
  std::map<double, std::vector<HypothesisPoint>> by_t;
  for (const auto& r : records) {
    by_t[r.t].push_back({r.id, Vec2(r.x, r.y)});
  }
  return {by_t.begin(), by_t.end()};
}

}  // namespace

ClearReport evaluate_records(const std::vector<TrackRecord>& records,
                             const GroundTruthLog& gt, double gate_m,
                             MotpDenominator denom) {
  const auto grouped = group_by_time(records);
  ClearEvaluator ev(gate_m, denom);
  std::size_t cursor = 0;
  for (const auto& frame : gt.frames) {
    std::vector<HypothesisPoint> hyps;
    while (cursor < grouped.size() && grouped[cursor].first < frame.t - 1e-9) ++cursor;
    if (cursor < grouped.size() && std::abs(grouped[cursor].first - frame.t) <= 1e-9) {
      hyps = grouped[cursor].second;
      ++cursor;
    }
    ev.add_frame(frame, hyps);
  }
  return ev.report();
}

std::vector<AblationVariant> standard_variants() {
  return {
      {"loc_match+Kalm_pred", false, "kalman"},
      {"loc_match+feat_match+Kalm_pred", true, "kalman"},
      {"loc_match+RNN_pred", false, "bilstm"},
      {"loc_match+feat_match+RNN_pred", true, "bilstm"},
  };
}

ComparisonTable run_ablation(const CameraLog& camera_log, const RadarLog& radar_log,
                             const GroundTruthLog& gt, const RunConfig& base,
                             const std::vector<AblationVariant>& variants,
                             std::shared_ptr<const LstmParams> pixel_params,
                             std::shared_ptr<const LstmParams> bev_params) {
  ComparisonTable table;
  table.seed = base.seed;
  const auto denom = base.metrics_motp_denominator == "matches" ? MotpDenominator::matches
                                                                : MotpDenominator::gt;
  for (const auto& variant : variants) {
    RunConfig cfg = base;
    cfg.use_appearance = variant.use_appearance;
    cfg.motion_model = variant.motion_model;
    const auto out = run_tri_tracker(camera_log, radar_log, cfg, pixel_params, bev_params);
    const struct {
      const char* name;
      const std::vector<TrackRecord>* records;
    } trackers[] = {{"Cam", &out.camera}, {"Rad", &out.radar}, {"SF", &out.fused}};
    for (const auto& trk : trackers) {
      const auto report = evaluate_records(*trk.records, gt, base.metrics_gate_m, denom);
      table.rows.push_back({variant.name, trk.name, report.rates.fpr, report.rates.fnr,
                            report.rates.idswr, report.mota, report.motp});
    }
  }
  return table;
}

std::string table_to_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "# seed=" << table.seed << "\n";
  out << "variant,tracker,fpr_pct,fnr_pct,idswr_pct,mota_pct,motp_m\n";
  for (const auto& r : table.rows) {
    out << r.variant << "," << r.tracker << "," << fixed6(r.fpr) << "," << fixed6(r.fnr)
        << "," << fixed6(r.idswr) << "," << fixed6(r.mota) << "," << fixed6(r.motp) << "\n";
  }
  return out.str();
}

std::string table_to_text(const ComparisonTable& table) {
  std::ostringstream out;
  out << "variant                              trk    FPR%    FNR%  IDSWR%    MOTA  MOTP(m)\n";
  for (const auto& r : table.rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-36s %-4s %7s %7s %7s %7s %8s\n", r.variant.c_str(),
                  r.tracker.c_str(), fixed2(r.fpr).c_str(), fixed2(r.fnr).c_str(),
                  fixed2(r.idswr).c_str(), fixed2(r.mota).c_str(), fixed2(r.motp).c_str());
    out << buf;
  }
  return out.str();
}

std::string clear_report_to_json(const ClearReport& report) {
  nlohmann::json j;
  j["counts"] = {{"fp", report.counts.fp},
                 {"fn", report.counts.fn},
                 {"idsw", report.counts.idsw},
                 {"gt_total", report.counts.gt_total},
                 {"matches", report.counts.matches}};
  j["fpr_pct"] = report.rates.fpr;
  j["fnr_pct"] = report.rates.fnr;
  j["idswr_pct"] = report.rates.idswr;
  j["mota_pct"] = report.mota;
  j["motp_m"] = report.motp;
  return j.dump(2);
}

std::string clear_report_csv_row(const std::string& tracker, const ClearReport& report) {
  std::ostringstream out;
  out << tracker << "," << fixed6(report.rates.fpr) << "," << fixed6(report.rates.fnr) << ","
      << fixed6(report.rates.idswr) << "," << fixed6(report.mota) << ","
      << fixed6(report.motp);
  return out.str();
}

long long coverage_gap_count(const std::vector<TrackRecord>& records,
                             const GroundTruthLog& gt, double radius_m) {
  const auto grouped = group_by_time(records);
  long long gaps = 0;
  std::size_t cursor = 0;
  for (const auto& frame : gt.frames) {
    while (cursor < grouped.size() && grouped[cursor].first < frame.t - 1e-9) ++cursor;
    const std::vector<HypothesisPoint>* hyps = nullptr;
    if (cursor < grouped.size() && std::abs(grouped[cursor].first - frame.t) <= 1e-9) {
      hyps = &grouped[cursor].second;
    }
    for (const auto& obj : frame.objects) {
      bool covered = false;
      if (hyps != nullptr) {
        for (const auto& h : *hyps) {
          if ((h.position - Vec2(obj.x, obj.y)).norm() <= radius_m) {
            covered = true;
            break;
          }
        }
      }
      if (!covered) ++gaps;
    }
  }
  return gaps;
}

namespace {

struct PanelSpec {
  const char* title;
  const std::vector<TrackRecord>* records;
};

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

void svg_panel(std::ostringstream& out, const PanelSpec& panel, const GroundTruthLog& gt,
               double x_off, double panel_w, double panel_h) {
  const double x_min = -6.0, x_max = 6.0, y_min = 4.0, y_max = 18.0;
  auto sx = [&](double x) { return x_off + (x - x_min) / (x_max - x_min) * panel_w; };
  auto sy = [&](double y) { return panel_h - (y - y_min) / (y_max - y_min) * panel_h + 20.0; };

  out << "<text x=\"" << x_off + panel_w / 2 << "\" y=\"14\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"12\">" << panel.title << "</text>\n";
  out << "<rect x=\"" << x_off << "\" y=\"20\" width=\"" << panel_w << "\" height=\""
      << panel_h << "\" fill=\"none\" stroke=\"#888\"/>\n";

  // GT dashed underneath
  std::map<int, std::vector<Vec2>> gt_paths;
  for (const auto& f : gt.frames) {
    for (const auto& o : f.objects) gt_paths[o.id].emplace_back(o.x, o.y);
  }
  for (const auto& [id, path] : gt_paths) {
    out << "<polyline fill=\"none\" stroke=\"#000\" stroke-width=\"1\" "
        << "stroke-dasharray=\"4,3\" points=\"";
    for (const auto& p : path) out << fixed2(sx(p.x())) << "," << fixed2(sy(p.y())) << " ";
    out << "\"/>\n";
  }

  std::map<int, std::vector<Vec2>> paths;
  for (const auto& r : *panel.records) paths[r.id].emplace_back(r.x, r.y);
  std::size_t color = 0;
  for (const auto& [id, path] : paths) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[color++ % 8]
        << "\" stroke-width=\"1.2\" points=\"";
    for (const auto& p : path) out << fixed2(sx(p.x())) << "," << fixed2(sy(p.y())) << " ";
    out << "\"/>\n";
  }
}

}  // namespace

PlotArtifacts emit_trajectory_plot(const TrajectoryPlotData& data, double gap_radius_m) {
  PlotArtifacts art;

  std::ostringstream csv;
  csv << "tracker,id,t,x,y\n";
  auto dump = [&](const char* name, const std::vector<TrackRecord>& records) {
    for (const auto& r : records) {
      csv << name << "," << r.id << "," << fixed6(r.t) << "," << fixed6(r.x) << ","
          << fixed6(r.y) << "\n";
    }
  };
  dump("camera", data.camera);
  dump("radar", data.radar);
  dump("fused", data.fused);
  for (const auto& f : data.gt.frames) {
    for (const auto& o : f.objects) {
      csv << "gt," << o.id << "," << fixed6(f.t) << "," << fixed6(o.x) << "," << fixed6(o.y)
          << "\n";
    }
  }
  art.points_csv = csv.str();

  std::ostringstream gaps;
  gaps << "tracker,gap_count\n";
  gaps << "camera," << coverage_gap_count(data.camera, data.gt, gap_radius_m) << "\n";
  gaps << "radar," << coverage_gap_count(data.radar, data.gt, gap_radius_m) << "\n";
  gaps << "fused," << coverage_gap_count(data.fused, data.gt, gap_radius_m) << "\n";
  art.gaps_csv = gaps.str();

  const double panel_w = 260.0, panel_h = 300.0, margin = 20.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << 3 * panel_w + 4 * margin << "\" height=\"" << panel_h + 50.0 << "\">\n";
  const PanelSpec panels[] = {{"camera", &data.camera},
                              {"radar", &data.radar},
                              {"fused", &data.fused}};
  double x_off = margin;
  for (const auto& p : panels) {
    svg_panel(svg, p, data.gt, x_off, panel_w, panel_h);
    x_off += panel_w + margin;
  }
  svg << "</svg>\n";
  art.svg = svg.str();
  return art;
}

}  // namespace fusetrack
