#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssmine/embeddings.hpp"
#include "ssmine/rng.hpp"
#include "ssmine/textprep.hpp"

namespace ssmine {

struct EncoderHyper {
  int d = 32;                  // embedding width
  int d_h = 32;                // hidden width
  double lr = 0.05;            // base rate, decayed by 1/sqrt(1 + version)
  double margin_loss_gamma = 0.2;
  int negatives_per_pair = 5;
  // Scale of the random window weights relative to 1/sqrt(3d). Well above 1
  // the tanh units start saturated, which scrambles smooth embedding
  // geometry at initialization while keeping identical token windows
  // identical; the untrained channel then keys on exact overlap instead of
  // mirroring the bag channel.
  double init_gain = 6.0;
  // Std of the random bias. Nonzero values pin part of each unit's range at
  // initialization, shrinking how much of the aligned embedding geometry
  // leaks into the untrained channel.
  double init_bias = 0.0;
};

// Embedding table plus a context-window encoder. The table feeds the bag
// representation directly; the encoder reads sliding three-token windows:
//   h_t = tanh(W [e_{t-1}; e_t; e_{t+1}] + b),  zero-padded at the edges.
struct EncoderModel {
  EncoderHyper hyper;
  EmbeddingTable emb;      // trainable copy of the pre-trained table
  Eigen::MatrixXd w_enc;   // d_h x 3d
  Eigen::VectorXd b_enc;   // d_h
  std::int64_t version = 0;

  // Pre-trained table for the bag channel, random window weights.
  static EncoderModel init(const EmbeddingTable& pretrained,
                           const EncoderHyper& hyper, std::uint64_t seed);
};

// Both fixed-length sentence vectors: the sum of token embeddings and the
// sum of encoder states, stamped with the model version they came from.
struct SentenceRepr {
  Eigen::VectorXd cw;
  Eigen::VectorXd ch;
  std::int64_t model_version = 0;
};

// Content token ids only; the caller strips the language tag.
SentenceRepr represent_ids(const EncoderModel& model,
                           std::span<const int> content_ids);

// Applies the model to a processed sentence (tag excluded).
SentenceRepr represent(const EncoderModel& model, const Sentence& sentence);

// One training example: the content token ids of an accepted pair.
struct BatchPair {
  std::vector<int> a_ids;
  std::vector<int> b_ids;
};

struct EncoderGrads {
  Eigen::MatrixXd d_emb;
  Eigen::MatrixXd d_w;
  Eigen::VectorXd d_b;
};

// Bidirectional hinge loss on both representation channels:
//   sum over pairs, directions and negatives of
//     max(0, gamma - cos(r_a, r_b) + cos(r_a, r_neg))
// where r ranges over the window-encoder sums and the embedding sums.
// negatives[p] lists the batch indices whose opposite side serves as a
// negative for pair p; an empty list drops the negative term.
double contrastive_loss(const EncoderModel& model,
                        const std::vector<BatchPair>& batch,
                        const std::vector<std::vector<int>>& negatives,
                        EncoderGrads* grads);

// One SGD update on the batch: samples negatives from non-matching batch
// members, steps all parameters, bumps the version. Returns the new model;
// the input snapshot is left untouched. Throws if the loss goes non-finite.
EncoderModel train_step(const EncoderModel& model,
                        const std::vector<BatchPair>& batch, Rng& rng);

// Versioned text checkpoint (magic header, hyper, parameters).
void save_checkpoint(const std::string& path, const EncoderModel& model);
EncoderModel load_checkpoint(const std::string& path);

}  // namespace ssmine
