#include "ssmine/encoder.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ssmine {

namespace {

constexpr const char* kMagic = "SSMINE-ENCODER-V1";

struct SentState {
  std::span<const int> ids;
  Eigen::MatrixXd h;       // n x d_h
  Eigen::VectorXd cw, ch;
  Eigen::VectorXd g_cw, g_ch;  // accumulated dL/d(cw), dL/d(ch)
};

SentState forward(const EncoderModel& model, std::span<const int> ids) {
  const int d = model.hyper.d;
  const int d_h = model.hyper.d_h;
  const int n = static_cast<int>(ids.size());
  for (int id : ids)
    if (id < 0 || id >= model.emb.rows())
      throw std::out_of_range("token id outside embedding table");

  SentState s;
  s.ids = ids;
  s.h.resize(n, d_h);
  s.cw = Eigen::VectorXd::Zero(d);
  s.ch = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd x(3 * d);
  for (int t = 0; t < n; ++t) {
    s.cw += model.emb.matrix.row(ids[t]).transpose();
    if (t > 0)
      x.segment(0, d) = model.emb.matrix.row(ids[t - 1]).transpose();
    else
      x.segment(0, d).setZero();
    x.segment(d, d) = model.emb.matrix.row(ids[t]).transpose();
    if (t + 1 < n)
      x.segment(2 * d, d) = model.emb.matrix.row(ids[t + 1]).transpose();
    else
      x.segment(2 * d, d).setZero();
    s.h.row(t) = (model.w_enc * x + model.b_enc).array().tanh();
    s.ch += s.h.row(t).transpose();
  }
  s.g_cw = Eigen::VectorXd::Zero(d);
  s.g_ch = Eigen::VectorXd::Zero(d_h);
  return s;
}

// Adds the gradient of cos(x, y) with respect to x into out (scaled).
// The zero-norm convention (cos = 0) makes the gradient zero there too.
void add_dcos_dx(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                 double scale, Eigen::VectorXd& out) {
  const double nx = x.norm(), ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return;
  const double c = x.dot(y) / (nx * ny);
  out += scale * (y / (nx * ny) - c * x / (nx * nx));
}

double cosine(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double nx = x.norm(), ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return x.dot(y) / (nx * ny);
}

void backward(const EncoderModel& model, SentState& s, EncoderGrads& g) {
  const int d = model.hyper.d;
  const int n = static_cast<int>(s.ids.size());
  // Bag channel: every occurrence of a token gets the same gradient.
  for (int t = 0; t < n; ++t) g.d_emb.row(s.ids[t]) += s.g_cw.transpose();
  if (s.g_ch.isZero(0.0)) return;
  Eigen::VectorXd x(3 * d);
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd ht = s.h.row(t).transpose();
    const Eigen::VectorXd dz =
        s.g_ch.array() * (1.0 - ht.array() * ht.array());
    if (t > 0)
      x.segment(0, d) = model.emb.matrix.row(s.ids[t - 1]).transpose();
    else
      x.segment(0, d).setZero();
    x.segment(d, d) = model.emb.matrix.row(s.ids[t]).transpose();
    if (t + 1 < n)
      x.segment(2 * d, d) = model.emb.matrix.row(s.ids[t + 1]).transpose();
    else
      x.segment(2 * d, d).setZero();
    g.d_w += dz * x.transpose();
    g.d_b += dz;
    const Eigen::VectorXd back = model.w_enc.transpose() * dz;  // 3d
    if (t > 0) g.d_emb.row(s.ids[t - 1]) += back.segment(0, d).transpose();
    g.d_emb.row(s.ids[t]) += back.segment(d, d).transpose();
    if (t + 1 < n)
      g.d_emb.row(s.ids[t + 1]) += back.segment(2 * d, d).transpose();
  }
}

}  // namespace

EncoderModel EncoderModel::init(const EmbeddingTable& pretrained,
                                const EncoderHyper& hyper,
                                std::uint64_t seed) {
  if (pretrained.dim != hyper.d)
    throw std::invalid_argument("hyper.d does not match embedding dim");
  EncoderModel model;
  model.hyper = hyper;
  model.emb = pretrained;
  Rng rng(seed);
  model.w_enc.resize(hyper.d_h, 3 * hyper.d);
  const double scale = hyper.init_gain / std::sqrt(3.0 * hyper.d);
  for (int i = 0; i < model.w_enc.rows(); ++i)
    for (int j = 0; j < model.w_enc.cols(); ++j)
      model.w_enc(i, j) = rng.gaussian() * scale;
  model.b_enc.resize(hyper.d_h);
  for (int i = 0; i < hyper.d_h; ++i)
    model.b_enc(i) = rng.gaussian() * hyper.init_bias;
  model.version = 0;
  return model;
}

SentenceRepr represent_ids(const EncoderModel& model,
                           std::span<const int> content_ids) {
  SentState s = forward(model, content_ids);
  return {std::move(s.cw), std::move(s.ch), model.version};
}

SentenceRepr represent(const EncoderModel& model, const Sentence& sentence) {
  std::span<const int> ids(sentence.token_ids);
  return represent_ids(model, ids.subspan(1));  // skip the language tag
}

double contrastive_loss(const EncoderModel& model,
                        const std::vector<BatchPair>& batch,
                        const std::vector<std::vector<int>>& negatives,
                        EncoderGrads* grads) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (negatives.size() != batch.size())
    throw std::invalid_argument("negatives must match batch size");

  const double gamma = model.hyper.margin_loss_gamma;
  const std::size_t p_count = batch.size();
  std::vector<SentState> a(p_count), b(p_count);
  for (std::size_t p = 0; p < p_count; ++p) {
    a[p] = forward(model, batch[p].a_ids);
    b[p] = forward(model, batch[p].b_ids);
  }

  double loss = 0.0;
  // One hinge term per (pair, negative, direction, channel).
  auto hinge = [&](SentState& anchor, SentState& pos, SentState* neg,
                   bool window_channel) {
    const auto& ra = window_channel ? anchor.ch : anchor.cw;
    const auto& rp = window_channel ? pos.ch : pos.cw;
    double term = gamma - cosine(ra, rp);
    if (neg != nullptr) term += cosine(ra, window_channel ? neg->ch : neg->cw);
    if (term <= 0.0) return;
    loss += term;
    if (grads == nullptr) return;
    auto& ga = window_channel ? anchor.g_ch : anchor.g_cw;
    auto& gp = window_channel ? pos.g_ch : pos.g_cw;
    add_dcos_dx(ra, rp, -1.0, ga);
    add_dcos_dx(rp, ra, -1.0, gp);
    if (neg != nullptr) {
      const auto& rn = window_channel ? neg->ch : neg->cw;
      auto& gn = window_channel ? neg->g_ch : neg->g_cw;
      add_dcos_dx(ra, rn, 1.0, ga);
      add_dcos_dx(rn, ra, 1.0, gn);
    }
  };

  for (std::size_t p = 0; p < p_count; ++p) {
    for (bool channel : {false, true}) {
      if (negatives[p].empty()) {
        hinge(a[p], b[p], nullptr, channel);
        hinge(b[p], a[p], nullptr, channel);
        continue;
      }
      for (int q : negatives[p]) {
        hinge(a[p], b[p], &b[q], channel);
        hinge(b[p], a[p], &a[q], channel);
      }
    }
  }

  if (grads != nullptr) {
    grads->d_emb = Eigen::MatrixXd::Zero(model.emb.rows(), model.hyper.d);
    grads->d_w = Eigen::MatrixXd::Zero(model.hyper.d_h, 3 * model.hyper.d);
    grads->d_b = Eigen::VectorXd::Zero(model.hyper.d_h);
    for (std::size_t p = 0; p < p_count; ++p) {
      backward(model, a[p], *grads);
      backward(model, b[p], *grads);
    }
  }
  return loss;
}

EncoderModel train_step(const EncoderModel& model,
                        const std::vector<BatchPair>& batch, Rng& rng) {
  const std::size_t p_count = batch.size();
  std::vector<std::vector<int>> negatives(p_count);
  if (p_count > 1) {
    for (std::size_t p = 0; p < p_count; ++p) {
      negatives[p].reserve(model.hyper.negatives_per_pair);
      for (int n = 0; n < model.hyper.negatives_per_pair; ++n) {
        int q = rng.index(p_count - 1);
        if (q >= static_cast<int>(p)) ++q;  // uniform over the others
        negatives[p].push_back(q);
      }
    }
  }

  EncoderGrads grads;
  const double loss = contrastive_loss(model, batch, negatives, &grads);
  if (!std::isfinite(loss))
    throw std::runtime_error(
        "non-finite contrastive loss; learning rate too high");

  EncoderModel next = model;
  const double lr =
      model.hyper.lr / std::sqrt(1.0 + static_cast<double>(model.version));
  next.emb.matrix -= lr * grads.d_emb;
  next.emb.unit_normalized = false;
  next.w_enc -= lr * grads.d_w;
  next.b_enc -= lr * grads.d_b;
  next.version = model.version + 1;
  if (!next.emb.matrix.allFinite() || !next.w_enc.allFinite() ||
      !next.b_enc.allFinite())
    throw std::runtime_error(
        "non-finite parameters after update; learning rate too high");
  return next;
}

void save_checkpoint(const std::string& path, const EncoderModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << kMagic << "\n";
  out << model.hyper.d << ' ' << model.hyper.d_h << ' ' << model.hyper.lr
      << ' ' << model.hyper.margin_loss_gamma << ' '
      << model.hyper.negatives_per_pair << "\n";
  out << model.version << "\n";
  out << model.emb.rows() << "\n";
  for (int i = 0; i < model.emb.rows(); ++i) {
    for (int j = 0; j < model.hyper.d; ++j)
      out << (j ? " " : "") << model.emb.matrix(i, j);
    out << "\n";
  }
  for (int i = 0; i < model.w_enc.rows(); ++i) {
    for (int j = 0; j < model.w_enc.cols(); ++j)
      out << (j ? " " : "") << model.w_enc(i, j);
    out << "\n";
  }
  for (int i = 0; i < model.b_enc.size(); ++i)
    out << (i ? " " : "") << model.b_enc(i);
  out << "\n";
}

EncoderModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic)
    throw std::runtime_error("not an encoder checkpoint: " + path);
  EncoderModel model;
  int rows = 0;
  in >> model.hyper.d >> model.hyper.d_h >> model.hyper.lr >>
      model.hyper.margin_loss_gamma >> model.hyper.negatives_per_pair;
  in >> model.version >> rows;
  if (!in || rows < 1) throw std::runtime_error("bad checkpoint: " + path);
  model.emb.dim = model.hyper.d;
  model.emb.matrix.resize(rows, model.hyper.d);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < model.hyper.d; ++j) in >> model.emb.matrix(i, j);
  model.w_enc.resize(model.hyper.d_h, 3 * model.hyper.d);
  for (int i = 0; i < model.w_enc.rows(); ++i)
    for (int j = 0; j < model.w_enc.cols(); ++j) in >> model.w_enc(i, j);
  model.b_enc.resize(model.hyper.d_h);
  for (int i = 0; i < model.b_enc.size(); ++i) in >> model.b_enc(i);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return model;
}

}  // namespace ssmine
