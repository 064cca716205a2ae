#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ssmine/encoder.hpp"
#include "ssmine/textprep.hpp"

namespace ssmine {

// Ratio-margin score of a candidate pair against its document-local
// neighbourhoods:
//   cos(x, y) / ( mean of k best cos(x, .) over cands_y / 2
//               + mean of k best cos(y, .) over cands_x / 2 )
// With fewer than k candidates on a side, all of them are used. Zero-norm
// vectors score cosine 0; a zero denominator yields score 0. Throws on an
// empty candidate set.
double margin_score(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    const std::vector<Eigen::VectorXd>& cands_x,
                    const std::vector<Eigen::VectorXd>& cands_y, int k = 4);

// Full cross-product of margin scores between two stacks of row vectors.
// This is the hot path: one cosine matrix product per call, then k-th
// order statistics per row and column.
Eigen::MatrixXd margin_matrix(const Eigen::MatrixXd& reps_l1,
                              const Eigen::MatrixXd& reps_l2, int k = 4);

// Pairs that are each other's top-scoring match in both directions.
// Score ties resolve to the lowest row/column index, which is the lowest
// line id when rows follow document order.
std::vector<std::pair<int, int>> mutual_top(const Eigen::MatrixXd& margin);

struct SelectResult {
  Eigen::MatrixXd margin_w, margin_h;      // n1 x n2 per channel
  std::vector<std::pair<int, int>> acc_w, acc_h, acc_dual;
  std::int64_t model_version = 0;
};

// Selection over precomputed representation stacks (row i = sentence i).
SelectResult select_pairs_reps(const Eigen::MatrixXd& cw_l1,
                               const Eigen::MatrixXd& ch_l1,
                               const Eigen::MatrixXd& cw_l2,
                               const Eigen::MatrixXd& ch_l2, int k = 4,
                               std::int64_t model_version = 0);

// Scores all sentence combinations of one document pair under both
// representation channels and intersects the two mutual-top sets. No score
// threshold is involved anywhere.
SelectResult select_pairs(const EncoderModel& model, const Document& doc_l1,
                          const Document& doc_l2, int k = 4);

struct MinerConfig {
  int k = 4;
  int batch_size = 50;
  int epochs = 8;
  std::uint64_t seed = 1;
  bool log_rejects = false;  // also log pairs rejected by both channels
  bool score_only = false;   // one scoring pass, no training
  int threads = 1;           // document pairs scored speculatively in parallel
};

// One mining-log row. Pairs accepted by at least one channel are always
// logged; fully rejected combinations only under log_rejects. is_true is
// -1 when no ground truth was attached to the corpus.
struct LogRecord {
  int epoch = 0;
  std::int64_t step = 0;
  std::int64_t model_version = 0;
  PairKey key;
  double score_w = 0.0, score_h = 0.0;
  bool acc_w = false, acc_h = false, acc_dual = false;
  int is_true = -1;
};

using LogSink = std::function<void(const LogRecord&)>;

struct SentRef {
  int doc = 0;   // index into corpus.docs_l1 / docs_l2
  int sent = 0;  // index into document.sentences
};

struct EpochStats {
  int epoch = 0;
  std::int64_t accepted = 0;  // dual acceptances, duplicates included
  std::int64_t unique_accepted = 0;
  std::int64_t train_steps = 0;
};

struct RunResult {
  std::shared_ptr<const EncoderModel> model;
  std::vector<EpochStats> epochs;
  // Unique dual-accepted pairs (per epoch and cumulative), deduplicated by
  // exact token strings, in first-acceptance order.
  std::vector<std::vector<std::pair<SentRef, SentRef>>> epoch_unique;
  std::vector<std::pair<SentRef, SentRef>> all_unique;
  std::int64_t total_steps = 0;
  std::vector<std::string> warnings;
};

// The mining loop: per epoch, document pairs are visited in seeded shuffled
// order; dual-accepted pairs fill a batch buffer; each full buffer triggers
// one training step, and the epoch-end remainder is flushed as a smaller
// batch. Every record carries the model version its scores came from.
// Output is byte-identical for a given corpus, config and seed, independent
// of the thread count.
RunResult run_loop(const ComparableCorpus& corpus, EncoderModel initial,
                   const MinerConfig& config, const LogSink& sink);

// TSV serialization of the mining log.
extern const char* kMiningLogHeader;
std::string format_log_record(const LogRecord& r);
std::vector<LogRecord> read_mining_log(const std::string& path);

}  // namespace ssmine
