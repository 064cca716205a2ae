#include <doctest.h>

#include <cmath>

#include "test_util.hpp"

#include "ssmine/encoder.hpp"
#include "ssmine/rng.hpp"

using namespace ssmine;

TEST_SUITE_BEGIN("encoder");

namespace {

EmbeddingTable table_of(std::initializer_list<std::initializer_list<double>> rows) {
  EmbeddingTable t;
  t.matrix.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.begin()->size()));
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) t.matrix(i, j++) = v;
    ++i;
  }
  t.dim = static_cast<int>(t.matrix.cols());
  return t;
}

EncoderModel tiny_model(std::uint64_t seed = 1) {
  EncoderHyper hyper;
  hyper.d = 2;
  hyper.d_h = 2;
  const EmbeddingTable emb = table_of({{0.1, -0.2},
                                       {0.3, 0.4},
                                       {-0.5, 0.2},
                                       {0.2, 0.1}});
  return EncoderModel::init(emb, hyper, seed);
}

}  // namespace

TEST_CASE("single-token sentence sums to that token's embedding") {
  const EncoderModel model = tiny_model();
  const std::vector<int> ids = {2};
  const SentenceRepr r = represent_ids(model, ids);
  CHECK(test_util::exact_equal(r.cw, model.emb.row(2)));
  CHECK(r.model_version == 0);
}

TEST_CASE("bag representation is order-invariant") {
  const EncoderModel model = tiny_model();
  const std::vector<int> a = {0, 1, 2, 3};
  const std::vector<int> b = {3, 2, 1, 0};
  CHECK(represent_ids(model, a).cw.isApprox(represent_ids(model, b).cw, 1e-12));
  // The window channel is order-sensitive.
  CHECK(!test_util::exact_equal(represent_ids(model, a).ch, represent_ids(model, b).ch));
}

TEST_CASE("window encoding matches a hand computation") {
  EncoderModel model = tiny_model();
  // Fixed small weights, written out explicitly.
  model.w_enc.resize(2, 6);
  model.w_enc << 0.1, -0.1, 0.2, 0.0, -0.2, 0.3,
                 0.0,  0.1, -0.3, 0.2, 0.1, -0.1;
  model.b_enc.resize(2);
  model.b_enc << 0.05, -0.1;

  const std::vector<int> ids = {0, 1};
  const SentenceRepr r = represent_ids(model, ids);

  // Independent arithmetic: e0 = (0.1, -0.2), e1 = (0.3, 0.4).
  const double e0[2] = {0.1, -0.2}, e1[2] = {0.3, 0.4};
  const double w[2][6] = {{0.1, -0.1, 0.2, 0.0, -0.2, 0.3},
                          {0.0, 0.1, -0.3, 0.2, 0.1, -0.1}};
  const double b[2] = {0.05, -0.1};
  double ch[2] = {0.0, 0.0};
  const double x0[6] = {0, 0, e0[0], e0[1], e1[0], e1[1]};
  const double x1[6] = {e0[0], e0[1], e1[0], e1[1], 0, 0};
  for (const double* x : {x0, x1})
    for (int i = 0; i < 2; ++i) {
      double z = b[i];
      for (int j = 0; j < 6; ++j) z += w[i][j] * x[j];
      ch[i] += std::tanh(z);
    }
  CHECK(r.ch(0) == doctest::Approx(ch[0]).epsilon(1e-12));
  CHECK(r.ch(1) == doctest::Approx(ch[1]).epsilon(1e-12));
  CHECK(r.cw(0) == doctest::Approx(e0[0] + e1[0]).epsilon(1e-12));
  CHECK(r.cw(1) == doctest::Approx(e0[1] + e1[1]).epsilon(1e-12));
}

TEST_CASE("represent rejects ids outside the table") {
  const EncoderModel model = tiny_model();
  const std::vector<int> bad = {0, 7};
  CHECK_THROWS_AS(represent_ids(model, bad), std::out_of_range);
}

TEST_CASE("identical positives and negatives give flat loss and zero grads") {
  const EncoderModel model = tiny_model(3);
  // Two identical pairs; each serves as the other's negative.
  const std::vector<BatchPair> batch = {{{0, 1}, {2, 3}}, {{0, 1}, {2, 3}}};
  const std::vector<std::vector<int>> negatives = {{1}, {0}};
  EncoderGrads grads;
  const double loss = contrastive_loss(model, batch, negatives, &grads);
  // pairs x directions x negatives x channels = 2*2*1*2 hinge terms.
  CHECK(loss == doctest::Approx(8 * model.hyper.margin_loss_gamma).epsilon(1e-12));
  CHECK(grads.d_emb.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(grads.d_w.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(grads.d_b.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero gamma with separated pairs gives zero loss") {
  EncoderModel model = tiny_model(4);
  model.hyper.margin_loss_gamma = 0.0;
  // One pair, no negatives: loss = 2 * max(0, -cos) per channel; make both
  // channel cosines positive by using the same sentence on both sides.
  const std::vector<BatchPair> batch = {{{0, 1}, {0, 1}}};
  const double loss = contrastive_loss(model, batch, {{}}, nullptr);
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("contrastive gradient matches finite differences") {
  EncoderHyper hyper;
  hyper.d = 3;
  hyper.d_h = 3;
  hyper.margin_loss_gamma = 0.5;
  Rng init(91);
  EmbeddingTable emb;
  emb.dim = 3;
  emb.matrix.resize(6, 3);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) emb.matrix(i, j) = init.gaussian() * 0.4;
  EncoderModel model = EncoderModel::init(emb, hyper, 17);

  const std::vector<BatchPair> batch = {{{0, 1}, {2}}, {{3}, {4, 5}}};
  const std::vector<std::vector<int>> negatives = {{1}, {0}};

  EncoderGrads grads;
  const double base = contrastive_loss(model, batch, negatives, &grads);
  CHECK(base > 0.0);

  const double h = 1e-6;
  auto relcheck = [&](double analytic, double& param) {
    const double orig = param;
    param = orig + h;
    const double up = contrastive_loss(model, batch, negatives, nullptr);
    param = orig - h;
    const double dn = contrastive_loss(model, batch, negatives, nullptr);
    param = orig;
    const double fd = (up - dn) / (2 * h);
    const double rel = std::abs(fd - analytic) /
                       std::max({std::abs(fd), std::abs(analytic), 1e-6});
    CHECK(rel < 1e-4);
  };

  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j)
      relcheck(grads.d_emb(i, j), model.emb.matrix(i, j));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 9; ++j) relcheck(grads.d_w(i, j), model.w_enc(i, j));
  for (int i = 0; i < 3; ++i) relcheck(grads.d_b(i), model.b_enc(i));
}

TEST_CASE("train_step decreases the loss on a fixed batch") {
  EncoderHyper hyper;
  hyper.d = 2;
  hyper.d_h = 2;
  hyper.lr = 0.01;
  hyper.negatives_per_pair = 5;
  const EmbeddingTable emb = table_of({{0.4, -0.1},
                                       {0.2, 0.5},
                                       {-0.3, 0.3},
                                       {0.1, -0.4},
                                       {0.5, 0.2},
                                       {-0.2, -0.3}});
  EncoderModel model = EncoderModel::init(emb, hyper, 29);
  const std::vector<BatchPair> batch = {{{0, 1}, {2}}, {{3, 4}, {5}}};
  // With two pairs the sampled negative is always the other pair.
  const std::vector<std::vector<int>> negs = {{1, 1, 1, 1, 1},
                                              {0, 0, 0, 0, 0}};
  Rng rng(1);
  double prev = contrastive_loss(model, batch, negs, nullptr);
  for (int step = 0; step < 10; ++step) {
    model = train_step(model, batch, rng);
    const double now = contrastive_loss(model, batch, negs, nullptr);
    CHECK(now <= prev + 1e-9);
    prev = now;
  }
  CHECK(model.version == 10);
}

TEST_CASE("zero learning rate leaves parameters untouched but bumps the version") {
  EncoderModel model = tiny_model(5);
  model.hyper.lr = 0.0;
  const Eigen::MatrixXd emb_before = model.emb.matrix;
  const Eigen::MatrixXd w_before = model.w_enc;
  Rng rng(2);
  const EncoderModel next =
      train_step(model, {{{0, 1}, {2, 3}}, {{1, 2}, {3, 0}}}, rng);
  CHECK(next.version == 1);
  CHECK(test_util::exact_equal(next.emb.matrix, emb_before));
  CHECK(test_util::exact_equal(next.w_enc, w_before));
}

TEST_CASE("training pulls true pairs above scrambled ones on the window channel") {
  EncoderHyper hyper;
  hyper.d = 4;
  hyper.d_h = 4;
  hyper.lr = 0.05;
  Rng init(13);
  EmbeddingTable emb;
  emb.dim = 4;
  emb.matrix.resize(12, 4);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 4; ++j) emb.matrix(i, j) = init.gaussian() * 0.3;
  EncoderModel model = EncoderModel::init(emb, hyper, 31);

  const std::vector<BatchPair> batch = {{{0, 1, 2}, {6, 7}},
                                        {{2, 3}, {8, 9}},
                                        {{4, 5, 0}, {10, 11}},
                                        {{1, 4}, {7, 10}}};
  Rng rng(3);
  for (int step = 0; step < 60; ++step) model = train_step(model, batch, rng);

  auto ch_cos = [&](const std::vector<int>& a, const std::vector<int>& b) {
    const Eigen::VectorXd x = represent_ids(model, a).ch;
    const Eigen::VectorXd y = represent_ids(model, b).ch;
    return x.dot(y) / (x.norm() * y.norm());
  };
  double true_mean = 0.0, scrambled_mean = 0.0;
  for (int p = 0; p < 4; ++p)
    true_mean += ch_cos(batch[p].a_ids, batch[p].b_ids) / 4;
  for (int p = 0; p < 4; ++p)
    scrambled_mean +=
        ch_cos(batch[p].a_ids, batch[(p + 1) % 4].b_ids) / 4;
  CHECK(true_mean > scrambled_mean);
}

TEST_CASE("checkpoint round-trips through disk") {
  EncoderModel model = tiny_model(8);
  Rng rng(4);
  model = train_step(model, {{{0, 1}, {2, 3}}, {{1, 0}, {3, 2}}}, rng);
  save_checkpoint("enc_roundtrip.txt", model);
  const EncoderModel loaded = load_checkpoint("enc_roundtrip.txt");
  CHECK(loaded.version == model.version);
  CHECK(test_util::exact_equal(loaded.emb.matrix, model.emb.matrix));
  CHECK(test_util::exact_equal(loaded.w_enc, model.w_enc));
  CHECK(test_util::exact_equal(loaded.b_enc, model.b_enc));
  CHECK(loaded.hyper.margin_loss_gamma == model.hyper.margin_loss_gamma);
}

TEST_SUITE_END();
