#include "fusetrack/lstm.hpp"

#include <cmath>
#include <random>
#include <type_traits>

#include <json.hpp>

namespace fusetrack {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat sigmoid(const Mat& m) { return (1.0 / (1.0 + (-m.array()).exp())).matrix(); }

// Batched caches for one direction; columns are samples.
struct DirectionCache {
  std::vector<Mat> x, i, f, g, o, c, tanh_c;
  std::vector<Mat> h_prev, c_prev;
  Mat h_last;
};

DirectionCache run_direction(const LstmCellParams& cell, bool peephole,
                             const std::vector<Mat>& inputs) {
  const int hidden = cell.hidden();
  const Eigen::Index n = inputs.front().cols();
  DirectionCache cache;
  Mat h = Mat::Zero(hidden, n);
  Mat c = Mat::Zero(hidden, n);
  for (const Mat& x : inputs) {
    cache.x.push_back(x);
    cache.h_prev.push_back(h);
    cache.c_prev.push_back(c);
    Mat ai = (cell.wi * x + cell.ui * h).colwise() + cell.bi;
    Mat af = (cell.wf * x + cell.uf * h).colwise() + cell.bf;
    if (peephole) {
      ai += cell.vi * c;
      af += cell.vf * c;
    }
    const Mat i = sigmoid(ai);
    const Mat f = sigmoid(af);
    const Mat g = ((cell.wc * x + cell.uc * h).colwise() + cell.bc).array().tanh();
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    Mat ao = (cell.wo * x + cell.uo * h).colwise() + cell.bo;
    if (peephole) ao += cell.vo * c;
    const Mat o = sigmoid(ao);
    const Mat tc = c.array().tanh();
    h = o.cwiseProduct(tc);
    cache.i.push_back(i);
    cache.f.push_back(f);
    cache.g.push_back(g);
    cache.o.push_back(o);
    cache.c.push_back(c);
    cache.tanh_c.push_back(tc);
  }
  cache.h_last = h;
  return cache;
}

struct CellGrads {
  Mat wi, ui, vi, wf, uf, vf, wc, uc, wo, uo, vo;
  Vec bi, bf, bc, bo;

  explicit CellGrads(const LstmCellParams& cell)
      : wi(Mat::Zero(cell.wi.rows(), cell.wi.cols())),
        ui(Mat::Zero(cell.ui.rows(), cell.ui.cols())),
        vi(Mat::Zero(cell.vi.rows(), cell.vi.cols())),
        wf(Mat::Zero(cell.wf.rows(), cell.wf.cols())),
        uf(Mat::Zero(cell.uf.rows(), cell.uf.cols())),
        vf(Mat::Zero(cell.vf.rows(), cell.vf.cols())),
        wc(Mat::Zero(cell.wc.rows(), cell.wc.cols())),
        uc(Mat::Zero(cell.uc.rows(), cell.uc.cols())),
        wo(Mat::Zero(cell.wo.rows(), cell.wo.cols())),
        uo(Mat::Zero(cell.uo.rows(), cell.uo.cols())),
        vo(Mat::Zero(cell.vo.rows(), cell.vo.cols())),
        bi(Vec::Zero(cell.bi.size())),
        bf(Vec::Zero(cell.bf.size())),
        bc(Vec::Zero(cell.bc.size())),
        bo(Vec::Zero(cell.bo.size())) {}
};

// Backpropagation through time for one direction; dh_last is the gradient at
// the final hidden state.
void backward_direction(const LstmCellParams& cell, bool peephole, const DirectionCache& cache,
                        const Mat& dh_last, CellGrads& g) {
  const int steps = static_cast<int>(cache.x.size());
  Mat dh_carry = dh_last;
  Mat dc_carry = Mat::Zero(dh_last.rows(), dh_last.cols());
  for (int t = steps - 1; t >= 0; --t) {
    const Mat dh = dh_carry;
    const Mat d_o = dh.cwiseProduct(cache.tanh_c[t]);
    const Mat da_o =
        d_o.cwiseProduct(cache.o[t]).cwiseProduct((1.0 - cache.o[t].array()).matrix());
    Mat dc = dh.cwiseProduct(cache.o[t])
                 .cwiseProduct((1.0 - cache.tanh_c[t].array().square()).matrix()) +
             dc_carry;
    if (peephole) dc += cell.vo.transpose() * da_o;
    const Mat di = dc.cwiseProduct(cache.g[t]);
    const Mat da_i =
        di.cwiseProduct(cache.i[t]).cwiseProduct((1.0 - cache.i[t].array()).matrix());
    const Mat df = dc.cwiseProduct(cache.c_prev[t]);
    const Mat da_f =
        df.cwiseProduct(cache.f[t]).cwiseProduct((1.0 - cache.f[t].array()).matrix());
    const Mat dg = dc.cwiseProduct(cache.i[t]);
    const Mat da_c = dg.cwiseProduct((1.0 - cache.g[t].array().square()).matrix());

    g.wi += da_i * cache.x[t].transpose();
    g.ui += da_i * cache.h_prev[t].transpose();
    g.wf += da_f * cache.x[t].transpose();
    g.uf += da_f * cache.h_prev[t].transpose();
    g.wc += da_c * cache.x[t].transpose();
    g.uc += da_c * cache.h_prev[t].transpose();
    g.wo += da_o * cache.x[t].transpose();
    g.uo += da_o * cache.h_prev[t].transpose();
    g.bi += da_i.rowwise().sum();
    g.bf += da_f.rowwise().sum();
    g.bc += da_c.rowwise().sum();
    g.bo += da_o.rowwise().sum();
    if (peephole) {
      g.vi += da_i * cache.c_prev[t].transpose();
      g.vf += da_f * cache.c_prev[t].transpose();
      g.vo += da_o * cache.c[t].transpose();
    }

    dh_carry = cell.ui.transpose() * da_i + cell.uf.transpose() * da_f +
               cell.uc.transpose() * da_c + cell.uo.transpose() * da_o;
    dc_carry = dc.cwiseProduct(cache.f[t]);
    if (peephole) {
      dc_carry += cell.vi.transpose() * da_i + cell.vf.transpose() * da_f;
    }
  }
}

// Normalized window tensor: one matrix (2 x N) per timestep, forward order.
std::vector<Mat> window_tensor(const LstmParams& params,
                               const std::vector<std::vector<Vec2>>& windows) {
  const int w = params.window;
  const Eigen::Index n = static_cast<Eigen::Index>(windows.size());
  std::vector<Mat> steps(w, Mat::Zero(2, n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& win = windows[k];
    for (int t = 0; t < w; ++t) {
      // repeat-oldest padding at the front
      const int src = std::max(0, static_cast<int>(win.size()) - w + t);
      steps[t].col(k) = (win[src] - params.norm_offset).cwiseQuotient(params.norm_scale);
    }
  }
  return steps;
}

struct BatchResult {
  double loss = 0.0;
  Mat pred;           // 2 x N, normalized space
  DirectionCache fc, bc;
  Mat hcat;           // 2H x N
};

BatchResult batch_forward(const LstmParams& params, const std::vector<Mat>& steps,
                          const Mat* targets_norm) {
  BatchResult r;
  std::vector<Mat> rev(steps.rbegin(), steps.rend());
  r.fc = run_direction(params.fwd, params.peephole, steps);
  r.bc = run_direction(params.bwd, params.peephole, rev);
  const int hidden = params.hidden();
  r.hcat.resize(2 * hidden, steps.front().cols());
  r.hcat.topRows(hidden) = r.fc.h_last;
  r.hcat.bottomRows(hidden) = r.bc.h_last;
  r.pred = (params.head_w * r.hcat).colwise() + params.head_b;
  if (targets_norm != nullptr) {
    r.loss = (r.pred - *targets_norm).squaredNorm() / static_cast<double>(r.pred.cols());
  }
  return r;
}

struct FullGrads {
  CellGrads fwd, bwd;
  Mat head_w;
  Vec head_b;

  explicit FullGrads(const LstmParams& p)
      : fwd(p.fwd),
        bwd(p.bwd),
        head_w(Mat::Zero(p.head_w.rows(), p.head_w.cols())),
        head_b(Vec::Zero(p.head_b.size())) {}
};

void batch_backward(const LstmParams& params, const BatchResult& r, const Mat& targets_norm,
                    FullGrads& g) {
  const Eigen::Index n = r.pred.cols();
  const int hidden = params.hidden();
  const Mat dpred = 2.0 * (r.pred - targets_norm) / static_cast<double>(n);
  g.head_w += dpred * r.hcat.transpose();
  g.head_b += dpred.rowwise().sum();
  const Mat dhcat = params.head_w.transpose() * dpred;
  backward_direction(params.fwd, params.peephole, r.fc, dhcat.topRows(hidden), g.fwd);
  backward_direction(params.bwd, params.peephole, r.bc, dhcat.bottomRows(hidden), g.bwd);
}

template <typename Fn>
void for_each_cell_block(LstmCellParams& c, Fn&& fn) {
  fn(c.wi); fn(c.ui); fn(c.vi); fn(c.bi);
  fn(c.wf); fn(c.uf); fn(c.vf); fn(c.bf);
  fn(c.wc); fn(c.uc); fn(c.bc);
  fn(c.wo); fn(c.uo); fn(c.vo); fn(c.bo);
}

template <typename Fn>
void for_each_grad_block(CellGrads& c, Fn&& fn) {
  fn(c.wi); fn(c.ui); fn(c.vi); fn(c.bi);
  fn(c.wf); fn(c.uf); fn(c.vf); fn(c.bf);
  fn(c.wc); fn(c.uc); fn(c.bc);
  fn(c.wo); fn(c.uo); fn(c.vo); fn(c.bo);
}

Eigen::VectorXd flatten_full(LstmParams params_copy, FullGrads* grads) {
  std::vector<double> out;
  auto push_mat = [&](const Mat& m) {
    out.insert(out.end(), m.data(), m.data() + m.size());
  };
  auto push_any = [&](auto& block) { push_mat(block); };
  if (grads == nullptr) {
    for_each_cell_block(params_copy.fwd, push_any);
    for_each_cell_block(params_copy.bwd, push_any);
    push_mat(params_copy.head_w);
    push_mat(params_copy.head_b);
  } else {
    for_each_grad_block(grads->fwd, push_any);
    for_each_grad_block(grads->bwd, push_any);
    push_mat(grads->head_w);
    push_mat(grads->head_b);
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

}  // namespace

LstmStep lstm_cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                        const Eigen::VectorXd& c_prev, const LstmCellParams& cell,
                        bool peephole) {
  Vec ai = cell.wi * x + cell.ui * h_prev + cell.bi;
  Vec af = cell.wf * x + cell.uf * h_prev + cell.bf;
  if (peephole) {
    ai += cell.vi * c_prev;
    af += cell.vf * c_prev;
  }
  const Vec i = (1.0 / (1.0 + (-ai.array()).exp())).matrix();
  const Vec f = (1.0 / (1.0 + (-af.array()).exp())).matrix();
  const Vec g = (cell.wc * x + cell.uc * h_prev + cell.bc).array().tanh();
  LstmStep step;
  step.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  Vec ao = cell.wo * x + cell.uo * h_prev + cell.bo;
  if (peephole) ao += cell.vo * step.c;
  const Vec o = (1.0 / (1.0 + (-ao.array()).exp())).matrix();
  step.h = o.cwiseProduct(step.c.array().tanh().matrix());
  return step;
}

Vec2 bilstm_forward(const std::vector<Vec2>& window, const LstmParams& params) {
  if (window.empty()) throw EmptyDataset{};
  const auto steps = window_tensor(params, {window});
  const auto r = batch_forward(params, steps, nullptr);
  return Vec2(r.pred.col(0)).cwiseProduct(params.norm_scale) + params.norm_offset;
}

double bilstm_loss(const LstmParams& params, const std::vector<std::vector<Vec2>>& windows,
                   const std::vector<Vec2>& targets) {
  const auto steps = window_tensor(params, windows);
  Mat t(2, static_cast<Eigen::Index>(targets.size()));
  for (Eigen::Index k = 0; k < t.cols(); ++k)
    t.col(k) = (targets[k] - params.norm_offset).cwiseQuotient(params.norm_scale);
  return batch_forward(params, steps, &t).loss;
}

std::pair<double, Eigen::VectorXd> bilstm_loss_and_gradient(
    const LstmParams& params, const std::vector<std::vector<Vec2>>& windows,
    const std::vector<Vec2>& targets) {
  const auto steps = window_tensor(params, windows);
  Mat t(2, static_cast<Eigen::Index>(targets.size()));
  for (Eigen::Index k = 0; k < t.cols(); ++k)
    t.col(k) = (targets[k] - params.norm_offset).cwiseQuotient(params.norm_scale);
  const auto r = batch_forward(params, steps, &t);
  FullGrads g(params);
  batch_backward(params, r, t, g);
  return {r.loss, flatten_full(params, &g)};
}

Eigen::VectorXd lstm_flatten(const LstmParams& params) {
  return flatten_full(params, nullptr);
}

void lstm_unflatten(LstmParams& params, const Eigen::VectorXd& theta) {
  Eigen::Index at = 0;
  auto take = [&](Mat& m) {
    m = Eigen::Map<const Mat>(theta.data() + at, m.rows(), m.cols());
    at += m.size();
  };
  auto take_any = [&](auto& block) {
    if constexpr (std::is_same_v<std::decay_t<decltype(block)>, Vec>) {
      block = theta.segment(at, block.size());
      at += block.size();
    } else {
      take(block);
    }
  };
  for_each_cell_block(params.fwd, take_any);
  for_each_cell_block(params.bwd, take_any);
  take(params.head_w);
  params.head_b = theta.segment(at, params.head_b.size());
}

LstmParams lstm_init(const BilstmTrainConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int h = cfg.hidden;
  const double scale = 1.0 / std::sqrt(static_cast<double>(h));
  std::uniform_real_distribution<double> dist(-scale, scale);
  auto rand_mat = [&](Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
    return m;
  };
  auto make_cell = [&]() {
    LstmCellParams c;
    c.wi = rand_mat(h, 2); c.ui = rand_mat(h, h);
    c.wf = rand_mat(h, 2); c.uf = rand_mat(h, h);
    c.wc = rand_mat(h, 2); c.uc = rand_mat(h, h);
    c.wo = rand_mat(h, 2); c.uo = rand_mat(h, h);
    if (cfg.peephole) {
      c.vi = rand_mat(h, h); c.vf = rand_mat(h, h); c.vo = rand_mat(h, h);
    } else {
      c.vi = Mat::Zero(h, h); c.vf = Mat::Zero(h, h); c.vo = Mat::Zero(h, h);
    }
    c.bi = Vec::Zero(h); c.bf = Vec::Ones(h);  // open forget gate at init
    c.bc = Vec::Zero(h); c.bo = Vec::Zero(h);
    return c;
  };
  LstmParams p;
  p.fwd = make_cell();
  p.bwd = make_cell();
  p.head_w = rand_mat(2, 2 * h);
  p.head_b = Vec::Zero(2);
  p.window = cfg.window;
  p.peephole = cfg.peephole;
  p.norm_scale = cfg.norm_scale;
  p.norm_offset = cfg.norm_offset;
  return p;
}

BilstmTrainResult train_bilstm(const std::vector<std::vector<Vec2>>& trajectories,
                               const BilstmTrainConfig& cfg, std::uint64_t seed) {
  std::vector<std::vector<Vec2>> windows;
  std::vector<Vec2> targets;
  for (const auto& traj : trajectories) {
    if (static_cast<int>(traj.size()) < cfg.window + 1) continue;
    for (std::size_t t = cfg.window; t < traj.size(); ++t) {
      windows.emplace_back(traj.begin() + (t - cfg.window), traj.begin() + t);
      targets.push_back(traj[t]);
    }
    if (cfg.birth_augmentation) {
      for (std::size_t t = 0; t + 2 < traj.size(); t += 3) {
        windows.push_back({traj[t]});                 // padded to [p, p, p]
        targets.push_back(traj[t + 1]);
        windows.push_back({traj[t], traj[t + 1]});    // padded to [p, p, q]
        targets.push_back(traj[t + 2]);
      }
    }
  }
  if (windows.empty()) throw EmptyDataset{};

  BilstmTrainResult result;
  result.params = lstm_init(cfg, seed);
  Eigen::VectorXd theta = lstm_flatten(result.params);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto [loss, grad] = bilstm_loss_and_gradient(result.params, windows, targets);
    if (epoch == 0) result.initial_loss = loss;
    theta -= cfg.learning_rate * grad;
    lstm_unflatten(result.params, theta);
  }
  result.final_loss = bilstm_loss(result.params, windows, targets);
  return result;
}

namespace {

nlohmann::json mat_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

nlohmann::json cell_json(const LstmCellParams& c) {
  nlohmann::json j;
  j["wi"] = mat_json(c.wi); j["ui"] = mat_json(c.ui); j["vi"] = mat_json(c.vi);
  j["wf"] = mat_json(c.wf); j["uf"] = mat_json(c.uf); j["vf"] = mat_json(c.vf);
  j["wc"] = mat_json(c.wc); j["uc"] = mat_json(c.uc);
  j["wo"] = mat_json(c.wo); j["uo"] = mat_json(c.uo); j["vo"] = mat_json(c.vo);
  j["bi"] = std::vector<double>(c.bi.data(), c.bi.data() + c.bi.size());
  j["bf"] = std::vector<double>(c.bf.data(), c.bf.data() + c.bf.size());
  j["bc"] = std::vector<double>(c.bc.data(), c.bc.data() + c.bc.size());
  j["bo"] = std::vector<double>(c.bo.data(), c.bo.data() + c.bo.size());
  return j;
}

LstmCellParams cell_from_json(const nlohmann::json& j) {
  LstmCellParams c;
  c.wi = mat_from_json(j.at("wi")); c.ui = mat_from_json(j.at("ui"));
  c.vi = mat_from_json(j.at("vi"));
  c.wf = mat_from_json(j.at("wf")); c.uf = mat_from_json(j.at("uf"));
  c.vf = mat_from_json(j.at("vf"));
  c.wc = mat_from_json(j.at("wc")); c.uc = mat_from_json(j.at("uc"));
  c.wo = mat_from_json(j.at("wo")); c.uo = mat_from_json(j.at("uo"));
  c.vo = mat_from_json(j.at("vo"));
  auto vec = [&](const char* key) {
    const auto& a = j.at(key);
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = a[i].get<double>();
    return v;
  };
  c.bi = vec("bi"); c.bf = vec("bf"); c.bc = vec("bc"); c.bo = vec("bo");
  return c;
}

}  // namespace

std::string lstm_to_json(const LstmParams& params) {
  nlohmann::json j;
  j["shape"] = {{"hidden", params.hidden()}, {"input", 2}, {"window", params.window}};
  j["peephole"] = params.peephole;
  j["norm_scale"] = {params.norm_scale.x(), params.norm_scale.y()};
  j["norm_offset"] = {params.norm_offset.x(), params.norm_offset.y()};
  j["fwd"] = cell_json(params.fwd);
  j["bwd"] = cell_json(params.bwd);
  j["head_w"] = mat_json(params.head_w);
  j["head_b"] = std::vector<double>(params.head_b.data(),
                                    params.head_b.data() + params.head_b.size());
  return j.dump(2);
}

LstmParams lstm_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  LstmParams p;
  p.window = j.at("shape").at("window").get<int>();
  p.peephole = j.at("peephole").get<bool>();
  p.norm_scale = Vec2(j.at("norm_scale")[0].get<double>(), j.at("norm_scale")[1].get<double>());
  p.norm_offset = Vec2(j.at("norm_offset")[0].get<double>(), j.at("norm_offset")[1].get<double>());
  p.fwd = cell_from_json(j.at("fwd"));
  p.bwd = cell_from_json(j.at("bwd"));
  p.head_w = mat_from_json(j.at("head_w"));
  const auto& hb = j.at("head_b");
  p.head_b = Vec(static_cast<Eigen::Index>(hb.size()));
  for (Eigen::Index i = 0; i < p.head_b.size(); ++i) p.head_b[i] = hb[i].get<double>();
  return p;
}

}  // namespace fusetrack
