#include "fusetrack/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

#include "fusetrack/logs.hpp"

namespace fusetrack {

AssociationConfig RunConfig::assoc_config(bool bev_space) const {
  AssociationConfig a;
  a.w = assoc_w;
  a.thr_low = assoc_thr_low;
  a.thr_high = assoc_thr_high;
  a.max_cost = assoc_max_cost;
  a.position_gate = bev_space ? assoc_gate_bev_m : assoc_gate_px;
  return a;
}

namespace {

struct KeySpec {
  std::string name;
  std::variant<double RunConfig::*, int RunConfig::*, bool RunConfig::*,
               std::string RunConfig::*, std::uint64_t RunConfig::*>
      member;
  bool required = false;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
};

// The deg/rad and nested-struct keys are handled through shim members.
struct ConfigShim {
  RunConfig cfg;
  double pitch_deg = 0.0;
};

std::vector<KeySpec> registry() {
  using C = RunConfig;
  std::vector<KeySpec> keys;
  auto add = [&](const std::string& name, auto member, bool required = false,
                 double mn = -std::numeric_limits<double>::infinity(),
                 double mx = std::numeric_limits<double>::infinity()) {
    keys.push_back({name, member, required, mn, mx});
  };
  // calibration block (intrinsics live in a nested struct, bound in code below)
  add("dbscan.eps_m", &C::dbscan_eps_m, false, 1e-9);
  add("dbscan.min_pts", &C::dbscan_min_pts, false, 1);
  add("assoc.w", &C::assoc_w, false, 0.0, 1.0);
  add("assoc.thr_low", &C::assoc_thr_low, false, 0.0);
  add("assoc.thr_high", &C::assoc_thr_high, false, 0.0);
  add("assoc.gate_bev_m", &C::assoc_gate_bev_m, false, 0.0);
  add("assoc.gate_px", &C::assoc_gate_px, false, 0.0);
  add("assoc.max_cost", &C::assoc_max_cost, false, 1.0);
  add("motion.model", &C::motion_model);
  add("motion.window", &C::motion_window, false, 1);
  add("motion.hidden", &C::motion_hidden, false, 1);
  add("motion.peephole", &C::motion_peephole);
  add("motion.epochs", &C::motion_epochs, false, 1);
  add("motion.learning_rate", &C::motion_learning_rate, false, 0.0);
  add("motion.bev_norm_m", &C::motion_bev_norm_m, false, 1e-9);
  add("motion.params_px", &C::motion_params_px);
  add("motion.params_bev", &C::motion_params_bev);
  add("motion.kalman_q_bev", &C::kalman_q_bev, false, 0.0);
  add("motion.kalman_r_bev", &C::kalman_r_bev, false, 0.0);
  add("motion.kalman_q_px", &C::kalman_q_px, false, 0.0);
  add("motion.kalman_r_px", &C::kalman_r_px, false, 0.0);
  add("motion.kalman_p0_pos_bev", &C::kalman_p0_pos_bev, false, 0.0);
  add("motion.kalman_p0_vel_bev", &C::kalman_p0_vel_bev, false, 0.0);
  add("motion.kalman_p0_pos_px", &C::kalman_p0_pos_px, false, 0.0);
  add("motion.kalman_p0_vel_px", &C::kalman_p0_vel_px, false, 0.0);
  add("fusion.gate_m", &C::fusion_gate_m, false, 0.0);
  add("fusion.max_skew_s", &C::fusion_max_skew_s, false, 0.0);
  add("metrics.gate_m", &C::metrics_gate_m, false, 0.0);
  add("metrics.motp_denominator", &C::metrics_motp_denominator);
  add("match.use_appearance", &C::use_appearance);
  add("sim.frame_rate", &C::sim_frame_rate, false, 1e-9);
  add("sim.walk_speed_mps", &C::sim_walk_speed_mps, false, 0.0);
  add("sim.emb_separation", &C::sim_emb_separation, false, 0.0);
  add("embedder.feature_dim", &C::embedder_feature_dim, false, 1);
  add("embedder.hidden", &C::embedder_hidden, false, 1);
  add("embedder.embed_dim", &C::embedder_embed_dim, false, 1);
  add("embedder.margin", &C::embedder_margin, false, 1e-12);
  add("embedder.lambda", &C::embedder_lambda, false, 0.0);
  add("embedder.learning_rate", &C::embedder_learning_rate, false, 0.0);
  add("embedder.steps", &C::embedder_steps, false, 1);
  add("embedder.batch", &C::embedder_batch, false, 1);
  add("embedder.identities", &C::embedder_identities, false, 1);
  add("embedder.samples_per_identity", &C::embedder_samples_per_identity, false, 2);
  add("embedder.feature_sigma", &C::embedder_feature_sigma, false, 0.0);
  add("embedder.mean_separation_sigmas", &C::embedder_mean_separation_sigmas, false, 0.0);
  add("run.seed", &C::seed);
  return keys;
}

// Keys that reach into nested structs.
struct NestedKey {
  std::string name;
  bool required = false;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  double* (*bind)(ConfigShim&);
};

std::vector<NestedKey> nested_registry() {
  auto k = [](const std::string& name, bool req, double mn, double mx,
              double* (*bind)(ConfigShim&)) {
    return NestedKey{name, req, mn, mx, bind};
  };
  const double inf = std::numeric_limits<double>::infinity();
  return {
      k("calibration.fx", true, 1e-9, inf,
        [](ConfigShim& s) { return &s.cfg.calibration.intrinsics.fx; }),
      k("calibration.fy", true, 1e-9, inf,
        [](ConfigShim& s) { return &s.cfg.calibration.intrinsics.fy; }),
      k("calibration.u0", true, -inf, inf,
        [](ConfigShim& s) { return &s.cfg.calibration.intrinsics.u0; }),
      k("calibration.v0", true, -inf, inf,
        [](ConfigShim& s) { return &s.cfg.calibration.intrinsics.v0; }),
      k("calibration.gamma", false, -inf, inf,
        [](ConfigShim& s) { return &s.cfg.calibration.intrinsics.gamma; }),
      k("calibration.height_m", true, 1e-9, inf,
        [](ConfigShim& s) { return &s.cfg.calibration.height_m; }),
      k("calibration.pitch_deg", true, -89.0, 89.0,
        [](ConfigShim& s) { return &s.pitch_deg; }),
      k("sim.cam_lateral_sigma_m", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.camera.lateral_sigma_m; }),
      k("sim.cam_depth_sigma_m", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.camera.depth_sigma_m; }),
      k("sim.cam_bbox_sigma_px", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.camera.bbox_sigma_px; }),
      k("sim.cam_miss", false, 0, 1,
        [](ConfigShim& s) { return &s.cfg.noise.camera.miss_base; }),
      k("sim.cam_occlusion_miss", false, 0, 1,
        [](ConfigShim& s) { return &s.cfg.noise.camera.occlusion_miss; }),
      k("sim.cam_occlusion_overlap", false, 0, 1,
        [](ConfigShim& s) { return &s.cfg.noise.camera.occlusion_overlap; }),
      k("sim.night_miss_boost", false, 0, 1,
        [](ConfigShim& s) { return &s.cfg.noise.camera.night_miss_boost; }),
      k("sim.fp_rate_day", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.camera.fp_rate_day; }),
      k("sim.fp_rate_night", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.camera.fp_rate_night; }),
      k("sim.rad_depth_sigma_m", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.radar.depth_sigma_m; }),
      k("sim.rad_lateral_sigma_m", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.radar.lateral_sigma_m; }),
      k("sim.rad_merge_m", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.radar.merge_distance_m; }),
      k("sim.rad_miss", false, 0, 1,
        [](ConfigShim& s) { return &s.cfg.noise.radar.miss_prob; }),
      k("sim.emb_sigma", false, 0, inf,
        [](ConfigShim& s) { return &s.cfg.noise.embedding_sigma; }),
  };
}

// Integer-valued keys living in nested structs.
struct NestedIntKey {
  std::string name;
  double min;
  int* (*bind)(ConfigShim&);
};

std::vector<NestedIntKey> nested_int_registry() {
  return {
      {"calibration.image_width", 1,
       [](ConfigShim& s) { return &s.cfg.calibration.image_width; }},
      {"calibration.image_height", 1,
       [](ConfigShim& s) { return &s.cfg.calibration.image_height; }},
      {"sim.rad_points_per_object", 1,
       [](ConfigShim& s) { return &s.cfg.noise.radar.points_per_object; }},
      {"track.max_invisible", 1, [](ConfigShim& s) { return &s.cfg.track.max_invisible; }},
      {"track.reliable_after", 1, [](ConfigShim& s) { return &s.cfg.track.reliable_after; }},
      {"track.gallery_size", 1, [](ConfigShim& s) { return &s.cfg.track.gallery_size; }},
      {"track.min_age_for_score", 0,
       [](ConfigShim& s) { return &s.cfg.track.min_age_for_score; }},
  };
}

int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

std::vector<std::string> all_key_names() {
  std::vector<std::string> names;
  for (const auto& k : registry()) names.push_back(k.name);
  for (const auto& k : nested_registry()) names.push_back(k.name);
  for (const auto& k : nested_int_registry()) names.push_back(k.name);
  names.push_back("track.min_visibility_pct");
  return names;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  ConfigShim shim;
  shim.cfg = RunConfig{};
  shim.cfg.calibration.intrinsics = {0, 0, 0, 0, 0};
  shim.pitch_deg = std::numeric_limits<double>::quiet_NaN();

  const auto keys = registry();
  const auto nested = nested_registry();
  const auto nested_ints = nested_int_registry();
  std::set<std::string> seen;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin, line_no, "expected `key = value`");
    }
    const std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    seen.insert(key);

    auto range_check = [&](double v, double mn, double mx) {
      if (v < mn || v > mx) {
        throw TypeMismatch(key, "value " + value + " outside [" + format_double(mn) + ", " +
                                    format_double(mx) + "]");
      }
    };

    bool handled = false;
    for (const auto& spec : keys) {
      if (spec.name != key) continue;
      handled = true;
      std::visit(
          [&](auto member) {
            using T = std::remove_reference_t<decltype(shim.cfg.*member)>;
            if constexpr (std::is_same_v<T, double>) {
              double v;
              if (!parse_double(value, v)) throw TypeMismatch(key, "expected a number");
              range_check(v, spec.min, spec.max);
              shim.cfg.*member = v;
            } else if constexpr (std::is_same_v<T, int>) {
              double v;
              if (!parse_double(value, v) || v != std::floor(v)) {
                throw TypeMismatch(key, "expected an integer");
              }
              range_check(v, spec.min, spec.max);
              shim.cfg.*member = static_cast<int>(v);
            } else if constexpr (std::is_same_v<T, bool>) {
              if (value == "true") {
                shim.cfg.*member = true;
              } else if (value == "false") {
                shim.cfg.*member = false;
              } else {
                throw TypeMismatch(key, "expected true or false");
              }
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
              double v;
              if (!parse_double(value, v) || v < 0 || v != std::floor(v)) {
                throw TypeMismatch(key, "expected a non-negative integer");
              }
              shim.cfg.*member = static_cast<std::uint64_t>(v);
            } else {
              shim.cfg.*member = value;
            }
          },
          spec.member);
      break;
    }
    if (!handled) {
      for (const auto& spec : nested) {
        if (spec.name != key) continue;
        handled = true;
        double v;
        if (!parse_double(value, v)) throw TypeMismatch(key, "expected a number");
        range_check(v, spec.min, spec.max);
        *spec.bind(shim) = v;
        break;
      }
    }
    if (!handled) {
      for (const auto& spec : nested_ints) {
        if (spec.name != key) continue;
        handled = true;
        double v;
        if (!parse_double(value, v) || v != std::floor(v)) {
          throw TypeMismatch(key, "expected an integer");
        }
        range_check(v, spec.min, std::numeric_limits<double>::infinity());
        *spec.bind(shim) = static_cast<int>(v);
        break;
      }
    }
    if (!handled && key == "track.min_visibility_pct") {
      handled = true;
      double v;
      if (!parse_double(value, v)) throw TypeMismatch(key, "expected a number");
      range_check(v, 0.0, 100.0);
      shim.cfg.track.min_visibility_pct = v;
    }
    if (!handled) {
      std::string best;
      int best_d = std::numeric_limits<int>::max();
      for (const auto& name : all_key_names()) {
        const int d = levenshtein(key, name);
        if (d < best_d) {
          best_d = d;
          best = name;
        }
      }
      throw UnknownKey(key, best_d <= 4 ? best : "");
    }
  }

  // Required keys.
  for (const auto& spec : nested) {
    if (spec.required && !seen.count(spec.name)) throw MissingKey(spec.name);
  }

  RunConfig cfg = shim.cfg;
  cfg.calibration.pitch_rad = shim.pitch_deg * M_PI / 180.0;

  if (cfg.assoc_thr_low >= cfg.assoc_thr_high) {
    throw TypeMismatch("assoc.thr_low", "must be below assoc.thr_high");
  }
  if (cfg.motion_model != "kalman" && cfg.motion_model != "bilstm") {
    throw TypeMismatch("motion.model", "expected kalman or bilstm");
  }
  if (cfg.metrics_motp_denominator != "gt" && cfg.metrics_motp_denominator != "matches") {
    throw TypeMismatch("metrics.motp_denominator", "expected gt or matches");
  }
  for (const auto& [key, path] :
       {std::pair{std::string("motion.params_px"), cfg.motion_params_px},
        std::pair{std::string("motion.params_bev"), cfg.motion_params_bev}}) {
    if (!path.empty() && !std::filesystem::exists(path)) {
      throw TypeMismatch(key, "referenced file does not exist: " + path);
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path), path);
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.calibration.intrinsics = {500.0, 500.0, 320.0, 240.0, 0.0};
  cfg.calibration.height_m = 1.635;
  cfg.calibration.pitch_rad = 3.2 * M_PI / 180.0;
  cfg.calibration.image_width = 640;
  cfg.calibration.image_height = 480;
  return cfg;
}

std::string dump_resolved(const RunConfig& cfg) {
  std::ostringstream out;
  auto put = [&](const std::string& key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  put("calibration.fx", format_double(cfg.calibration.intrinsics.fx));
  put("calibration.fy", format_double(cfg.calibration.intrinsics.fy));
  put("calibration.u0", format_double(cfg.calibration.intrinsics.u0));
  put("calibration.v0", format_double(cfg.calibration.intrinsics.v0));
  put("calibration.gamma", format_double(cfg.calibration.intrinsics.gamma));
  put("calibration.height_m", format_double(cfg.calibration.height_m));
  put("calibration.pitch_deg", format_double(cfg.calibration.pitch_rad * 180.0 / M_PI));
  put("calibration.image_width", std::to_string(cfg.calibration.image_width));
  put("calibration.image_height", std::to_string(cfg.calibration.image_height));
  put("dbscan.eps_m", format_double(cfg.dbscan_eps_m));
  put("dbscan.min_pts", std::to_string(cfg.dbscan_min_pts));
  put("assoc.w", format_double(cfg.assoc_w));
  put("assoc.thr_low", format_double(cfg.assoc_thr_low));
  put("assoc.thr_high", format_double(cfg.assoc_thr_high));
  put("assoc.gate_bev_m", format_double(cfg.assoc_gate_bev_m));
  put("assoc.gate_px", format_double(cfg.assoc_gate_px));
  put("assoc.max_cost", format_double(cfg.assoc_max_cost));
  put("track.max_invisible", std::to_string(cfg.track.max_invisible));
  put("track.min_visibility_pct", format_double(cfg.track.min_visibility_pct));
  put("track.reliable_after", std::to_string(cfg.track.reliable_after));
  put("track.gallery_size", std::to_string(cfg.track.gallery_size));
  put("track.min_age_for_score", std::to_string(cfg.track.min_age_for_score));
  put("motion.model", cfg.motion_model);
  put("motion.window", std::to_string(cfg.motion_window));
  put("motion.hidden", std::to_string(cfg.motion_hidden));
  put("motion.peephole", cfg.motion_peephole ? "true" : "false");
  put("motion.epochs", std::to_string(cfg.motion_epochs));
  put("motion.learning_rate", format_double(cfg.motion_learning_rate));
  put("motion.bev_norm_m", format_double(cfg.motion_bev_norm_m));
  put("motion.params_px", cfg.motion_params_px);
  put("motion.params_bev", cfg.motion_params_bev);
  put("motion.kalman_q_bev", format_double(cfg.kalman_q_bev));
  put("motion.kalman_r_bev", format_double(cfg.kalman_r_bev));
  put("motion.kalman_q_px", format_double(cfg.kalman_q_px));
  put("motion.kalman_r_px", format_double(cfg.kalman_r_px));
  put("motion.kalman_p0_pos_bev", format_double(cfg.kalman_p0_pos_bev));
  put("motion.kalman_p0_vel_bev", format_double(cfg.kalman_p0_vel_bev));
  put("motion.kalman_p0_pos_px", format_double(cfg.kalman_p0_pos_px));
  put("motion.kalman_p0_vel_px", format_double(cfg.kalman_p0_vel_px));
  put("fusion.gate_m", format_double(cfg.fusion_gate_m));
  put("fusion.max_skew_s", format_double(cfg.fusion_max_skew_s));
  put("metrics.gate_m", format_double(cfg.metrics_gate_m));
  put("metrics.motp_denominator", cfg.metrics_motp_denominator);
  put("match.use_appearance", cfg.use_appearance ? "true" : "false");
  put("sim.frame_rate", format_double(cfg.sim_frame_rate));
  put("sim.walk_speed_mps", format_double(cfg.sim_walk_speed_mps));
  put("sim.cam_lateral_sigma_m", format_double(cfg.noise.camera.lateral_sigma_m));
  put("sim.cam_depth_sigma_m", format_double(cfg.noise.camera.depth_sigma_m));
  put("sim.cam_bbox_sigma_px", format_double(cfg.noise.camera.bbox_sigma_px));
  put("sim.cam_miss", format_double(cfg.noise.camera.miss_base));
  put("sim.cam_occlusion_miss", format_double(cfg.noise.camera.occlusion_miss));
  put("sim.cam_occlusion_overlap", format_double(cfg.noise.camera.occlusion_overlap));
  put("sim.night_miss_boost", format_double(cfg.noise.camera.night_miss_boost));
  put("sim.fp_rate_day", format_double(cfg.noise.camera.fp_rate_day));
  put("sim.fp_rate_night", format_double(cfg.noise.camera.fp_rate_night));
  put("sim.rad_depth_sigma_m", format_double(cfg.noise.radar.depth_sigma_m));
  put("sim.rad_lateral_sigma_m", format_double(cfg.noise.radar.lateral_sigma_m));
  put("sim.rad_merge_m", format_double(cfg.noise.radar.merge_distance_m));
  put("sim.rad_miss", format_double(cfg.noise.radar.miss_prob));
  put("sim.rad_points_per_object", std::to_string(cfg.noise.radar.points_per_object));
  put("sim.emb_sigma", format_double(cfg.noise.embedding_sigma));
  put("sim.emb_separation", format_double(cfg.sim_emb_separation));
  put("embedder.feature_dim", std::to_string(cfg.embedder_feature_dim));
  put("embedder.hidden", std::to_string(cfg.embedder_hidden));
  put("embedder.embed_dim", std::to_string(cfg.embedder_embed_dim));
  put("embedder.margin", format_double(cfg.embedder_margin));
  put("embedder.lambda", format_double(cfg.embedder_lambda));
  put("embedder.learning_rate", format_double(cfg.embedder_learning_rate));
  put("embedder.steps", std::to_string(cfg.embedder_steps));
  put("embedder.batch", std::to_string(cfg.embedder_batch));
  put("embedder.identities", std::to_string(cfg.embedder_identities));
  put("embedder.samples_per_identity", std::to_string(cfg.embedder_samples_per_identity));
  put("embedder.feature_sigma", format_double(cfg.embedder_feature_sigma));
  put("embedder.mean_separation_sigmas", format_double(cfg.embedder_mean_separation_sigmas));
  put("run.seed", std::to_string(cfg.seed));
  return out.str();
}

}  // namespace fusetrack
