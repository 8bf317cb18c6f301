#include "fusetrack/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace fusetrack {

int LabeledDataset::num_identities() const {
  std::set<int> ids(labels.begin(), labels.end());
  return static_cast<int>(ids.size());
}

namespace {

struct Forward {
  Eigen::VectorXd x, u, h, z, e, logits, probs;
  double norm = 0.0;
};

Forward forward_pass(const EmbedderParams& p, const Eigen::VectorXd& x) {
  Forward f;
  f.x = x;
  f.u = p.w1 * x + p.b1;
  f.h = f.u.array().tanh();
  f.z = p.w2 * f.h + p.b2;
  f.norm = f.z.norm();
  f.e = f.z / f.norm;
  f.logits = p.w3 * f.e + p.b3;
  const double m = f.logits.maxCoeff();
  Eigen::ArrayXd ex = (f.logits.array() - m).exp();
  f.probs = (ex / ex.sum()).matrix();
  return f;
}

struct Grads {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  explicit Grads(const EmbedderParams& p)
      : w1(Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols())),
        w2(Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols())),
        w3(Eigen::MatrixXd::Zero(p.w3.rows(), p.w3.cols())),
        b1(Eigen::VectorXd::Zero(p.b1.size())),
        b2(Eigen::VectorXd::Zero(p.b2.size())),
        b3(Eigen::VectorXd::Zero(p.b3.size())) {}
};

// Backprop de (gradient at the normalized embedding) and dlogits through one
// sample's forward pass.
void backward_sample(const EmbedderParams& p, const Forward& f, const Eigen::VectorXd& de,
                     const Eigen::VectorXd& dlogits, Grads& g) {
  Eigen::VectorXd de_total = de;
  if (dlogits.size() > 0) {
    g.w3 += dlogits * f.e.transpose();
    g.b3 += dlogits;
    de_total += p.w3.transpose() * dlogits;
  }
  // e = z / ||z||
  const Eigen::VectorXd dz = (de_total - f.e * f.e.dot(de_total)) / f.norm;
  g.w2 += dz * f.h.transpose();
  g.b2 += dz;
  const Eigen::VectorXd dh = p.w2.transpose() * dz;
  const Eigen::VectorXd du = dh.array() * (1.0 - f.h.array().square());
  g.w1 += du * f.x.transpose();
  g.b1 += du;
}

struct TripletLossParts {
  Forward fa, fp, fn;
  double loss = 0.0;
  bool hinge_active = false;
};

TripletLossParts triplet_parts(const EmbedderParams& p, const Eigen::VectorXd& xa,
                               const Eigen::VectorXd& xp, const Eigen::VectorXd& xn,
                               int ya, int yp, int yn, const LossConfig& cfg) {
  TripletLossParts t;
  t.fa = forward_pass(p, xa);
  t.fp = forward_pass(p, xp);
  t.fn = forward_pass(p, xn);
  const double d_ap = (t.fa.e - t.fp.e).squaredNorm();
  const double d_an = (t.fa.e - t.fn.e).squaredNorm();
  const double hinge = cfg.margin_alpha + d_ap - d_an;
  t.hinge_active = hinge > 0.0;
  t.loss = std::max(0.0, hinge);
  t.loss += cfg.lambda * (softmax_loss(t.fa.logits, ya) + softmax_loss(t.fp.logits, yp) +
                          softmax_loss(t.fn.logits, yn));
  return t;
}

void accumulate_gradient(const EmbedderParams& p, const TripletLossParts& t, int ya, int yp,
                         int yn, const LossConfig& cfg, Grads& g) {
  Eigen::VectorXd dea = Eigen::VectorXd::Zero(t.fa.e.size());
  Eigen::VectorXd dep = dea, den = dea;
  if (t.hinge_active) {
    dea = 2.0 * (t.fn.e - t.fp.e);
    dep = 2.0 * (t.fp.e - t.fa.e);
    den = 2.0 * (t.fa.e - t.fn.e);
  }
  auto dlogits = [&](const Forward& f, int y) {
    Eigen::VectorXd d = f.probs * cfg.lambda;
    d[y] -= cfg.lambda;
    return d;
  };
  backward_sample(p, t.fa, dea, dlogits(t.fa, ya), g);
  backward_sample(p, t.fp, dep, dlogits(t.fp, yp), g);
  backward_sample(p, t.fn, den, dlogits(t.fn, yn), g);
}

Eigen::VectorXd flatten_grads(const Grads& g) {
  Eigen::VectorXd out(g.w1.size() + g.b1.size() + g.w2.size() + g.b2.size() + g.w3.size() +
                      g.b3.size());
  Eigen::Index at = 0;
  auto put_m = [&](const Eigen::MatrixXd& m) {
    out.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  };
  auto put_v = [&](const Eigen::VectorXd& v) {
    out.segment(at, v.size()) = v;
    at += v.size();
  };
  put_m(g.w1); put_v(g.b1); put_m(g.w2); put_v(g.b2); put_m(g.w3); put_v(g.b3);
  return out;
}

}  // namespace

Embedding EmbedderParams::embed(const Eigen::VectorXd& features) const {
  const Eigen::VectorXd h = (w1 * features + b1).array().tanh();
  return l2_normalize(w2 * h + b2);
}

Eigen::Index EmbedderParams::param_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

Eigen::VectorXd EmbedderParams::flatten() const {
  Grads g(*this);
  g.w1 = w1; g.b1 = b1; g.w2 = w2; g.b2 = b2; g.w3 = w3; g.b3 = b3;
  return flatten_grads(g);
}

void EmbedderParams::unflatten(const Eigen::VectorXd& theta) {
  Eigen::Index at = 0;
  auto take_m = [&](Eigen::MatrixXd& m) {
    m = Eigen::Map<const Eigen::MatrixXd>(theta.data() + at, m.rows(), m.cols());
    at += m.size();
  };
  auto take_v = [&](Eigen::VectorXd& v) {
    v = theta.segment(at, v.size());
    at += v.size();
  };
  take_m(w1); take_v(b1); take_m(w2); take_v(b2); take_m(w3); take_v(b3);
}

double embedder_total_loss(const EmbedderParams& params, const Eigen::VectorXd& xa,
                           const Eigen::VectorXd& xp, const Eigen::VectorXd& xn,
                           int ya, int yp, int yn, const LossConfig& cfg) {
  return triplet_parts(params, xa, xp, xn, ya, yp, yn, cfg).loss;
}

Eigen::VectorXd embedder_total_gradient(const EmbedderParams& params,
                                        const Eigen::VectorXd& xa, const Eigen::VectorXd& xp,
                                        const Eigen::VectorXd& xn, int ya, int yp, int yn,
                                        const LossConfig& cfg) {
  Grads g(params);
  const auto parts = triplet_parts(params, xa, xp, xn, ya, yp, yn, cfg);
  accumulate_gradient(params, parts, ya, yp, yn, cfg, g);
  return flatten_grads(g);
}

namespace {

EmbedderParams init_params(int input_dim, int hidden, int embed_dim, int classes,
                           std::mt19937_64& rng) {
  auto fill = [&](Eigen::MatrixXd& m, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  };
  EmbedderParams p;
  p.w1.resize(hidden, input_dim);
  p.w2.resize(embed_dim, hidden);
  p.w3.resize(classes, embed_dim);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.b2 = Eigen::VectorXd::Zero(embed_dim);
  p.b3 = Eigen::VectorXd::Zero(classes);
  fill(p.w1, 1.0 / std::sqrt(double(input_dim)));
  fill(p.w2, 1.0 / std::sqrt(double(hidden)));
  fill(p.w3, 1.0 / std::sqrt(double(embed_dim)));
  return p;
}

}  // namespace

TrainedEmbedder train_embedder(const LabeledDataset& dataset, const EmbedderTrainConfig& cfg,
                               std::uint64_t seed) {
  std::unordered_map<int, std::vector<Eigen::Index>> by_id;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(dataset.labels.size()); ++i) {
    by_id[dataset.labels[i]].push_back(i);
  }
  if (by_id.size() < 2) throw InsufficientIdentities{};
  for (const auto& [id, rows] : by_id) {
    if (rows.size() < 2) throw InsufficientIdentities{};
  }

  std::mt19937_64 rng(seed);

  // Remap labels to a dense 0..C-1 range, deterministically by label value.
  std::vector<int> id_order;
  for (const auto& [id, rows] : by_id) id_order.push_back(id);
  std::sort(id_order.begin(), id_order.end());
  std::unordered_map<int, int> dense;
  for (std::size_t k = 0; k < id_order.size(); ++k) dense[id_order[k]] = static_cast<int>(k);
  const int classes = static_cast<int>(id_order.size());

  // Per-identity holdout split.
  std::vector<Eigen::Index> train_rows, held_rows;
  for (int id : id_order) {
    auto rows = by_id[id];
    const auto held = std::max<std::size_t>(1, static_cast<std::size_t>(
                          std::floor(rows.size() * cfg.holdout_fraction)));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      (k < rows.size() - held ? train_rows : held_rows).push_back(rows[k]);
    }
  }

  std::unordered_map<int, std::vector<Eigen::Index>> train_by_id;
  for (Eigen::Index r : train_rows) train_by_id[dense[dataset.labels[r]]].push_back(r);

  EmbedderParams params = init_params(static_cast<int>(dataset.features.cols()), cfg.hidden,
                                      cfg.embed_dim, classes, rng);
  LossConfig loss_cfg{cfg.margin_alpha, cfg.lambda, classes};

  std::uniform_int_distribution<int> pick_id(0, classes - 1);
  for (int step = 0; step < cfg.steps; ++step) {
    Grads g(params);
    for (int b = 0; b < cfg.batch; ++b) {
      const int ida = pick_id(rng);
      int idn = pick_id(rng);
      while (idn == ida) idn = pick_id(rng);
      const auto& rows_a = train_by_id[ida];
      const auto& rows_n = train_by_id[idn];
      std::uniform_int_distribution<std::size_t> pa(0, rows_a.size() - 1);
      std::uniform_int_distribution<std::size_t> pn(0, rows_n.size() - 1);
      const std::size_t i1 = pa(rng);
      std::size_t i2 = pa(rng);
      while (rows_a.size() > 1 && i2 == i1) i2 = pa(rng);
      const Eigen::VectorXd xa = dataset.features.row(rows_a[i1]);
      const Eigen::VectorXd xp = dataset.features.row(rows_a[i2]);
      const Eigen::VectorXd xn = dataset.features.row(rows_n[pn(rng)]);
      const auto parts = triplet_parts(params, xa, xp, xn, ida, ida, idn, loss_cfg);
      accumulate_gradient(params, parts, ida, ida, idn, loss_cfg, g);
    }
    const double scale = cfg.learning_rate / cfg.batch;
    params.w1 -= scale * g.w1; params.b1 -= scale * g.b1;
    params.w2 -= scale * g.w2; params.b2 -= scale * g.b2;
    params.w3 -= scale * g.w3; params.b3 -= scale * g.b3;
  }

  // Calibrate the verification threshold on held-out pairs.
  std::vector<Embedding> held_emb;
  std::vector<int> held_lab;
  for (Eigen::Index r : held_rows) {
    held_emb.push_back(params.embed(dataset.features.row(r)));
    held_lab.push_back(dense[dataset.labels[r]]);
  }
  std::vector<double> same_d, diff_d;
  for (std::size_t i = 0; i < held_emb.size(); ++i) {
    for (std::size_t j = i + 1; j < held_emb.size(); ++j) {
      const double d = embedding_distance(held_emb[i], held_emb[j], DistanceMetric::euclidean);
      (held_lab[i] == held_lab[j] ? same_d : diff_d).push_back(d);
    }
  }

  TrainedEmbedder out;
  out.params = params;
  double best_acc = -1.0, best_thr = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double thr = k * 0.01;
    std::size_t correct = 0;
    for (double d : same_d) correct += (d < thr);
    for (double d : diff_d) correct += (d >= thr);
    const double acc = static_cast<double>(correct) /
                       static_cast<double>(same_d.size() + diff_d.size());
    if (acc > best_acc) {
      best_acc = acc;
      best_thr = thr;
    }
  }
  out.threshold = best_thr;
  out.holdout_accuracy = best_acc;
  return out;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

std::string embedder_to_json(const TrainedEmbedder& e) {
  nlohmann::json j;
  j["shape"] = {{"input", e.params.w1.cols()},
                {"hidden", e.params.w1.rows()},
                {"embed", e.params.w2.rows()},
                {"classes", e.params.w3.rows()}};
  j["w1"] = matrix_json(e.params.w1);
  j["b1"] = std::vector<double>(e.params.b1.data(), e.params.b1.data() + e.params.b1.size());
  j["w2"] = matrix_json(e.params.w2);
  j["b2"] = std::vector<double>(e.params.b2.data(), e.params.b2.data() + e.params.b2.size());
  j["w3"] = matrix_json(e.params.w3);
  j["b3"] = std::vector<double>(e.params.b3.data(), e.params.b3.data() + e.params.b3.size());
  j["threshold"] = e.threshold;
  j["holdout_accuracy"] = e.holdout_accuracy;
  return j.dump(2);
}

TrainedEmbedder embedder_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  TrainedEmbedder e;
  e.params.w1 = matrix_from_json(j.at("w1"));
  e.params.b1 = vector_from_json(j.at("b1"));
  e.params.w2 = matrix_from_json(j.at("w2"));
  e.params.b2 = vector_from_json(j.at("b2"));
  e.params.w3 = matrix_from_json(j.at("w3"));
  e.params.b3 = vector_from_json(j.at("b3"));
  e.threshold = j.at("threshold").get<double>();
  e.holdout_accuracy = j.at("holdout_accuracy").get<double>();
  return e;
}

}  // namespace fusetrack
