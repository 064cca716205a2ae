#include "ssmine/miner.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <deque>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "ssmine/rng.hpp"

namespace ssmine {

namespace {

Eigen::MatrixXd normalize_rows_of(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

// Mean of the k largest entries, halved; the margin denominator for one side.
double half_mean_top_k(std::vector<double>& values, int k) {
  const int k_eff = std::min<int>(k, static_cast<int>(values.size()));
  std::nth_element(values.begin(), values.begin() + (k_eff - 1), values.end(),
                   std::greater<double>());
  double sum = 0.0;
  for (int i = 0; i < k_eff; ++i) sum += values[i];
  return sum / (2.0 * k_eff);
}

}  // namespace

double margin_score(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    const std::vector<Eigen::VectorXd>& cands_x,
                    const std::vector<Eigen::VectorXd>& cands_y, int k) {
  if (cands_x.empty() || cands_y.empty())
    throw std::runtime_error("no candidates");
  if (k < 1) throw std::invalid_argument("k must be >= 1");

  auto cos = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
  };

  std::vector<double> x_side, y_side;
  x_side.reserve(cands_y.size());
  for (const auto& z : cands_y) x_side.push_back(cos(x, z));
  y_side.reserve(cands_x.size());
  for (const auto& z : cands_x) y_side.push_back(cos(y, z));

  const double den = half_mean_top_k(x_side, k) + half_mean_top_k(y_side, k);
  if (den == 0.0) return 0.0;
  return cos(x, y) / den;
}

Eigen::MatrixXd margin_matrix(const Eigen::MatrixXd& reps_l1,
                              const Eigen::MatrixXd& reps_l2, int k) {
  if (reps_l1.rows() == 0 || reps_l2.rows() == 0)
    throw std::runtime_error("no candidates");
  if (k < 1) throw std::invalid_argument("k must be >= 1");

  const Eigen::MatrixXd cos =
      normalize_rows_of(reps_l1) * normalize_rows_of(reps_l2).transpose();
  const int n1 = static_cast<int>(cos.rows());
  const int n2 = static_cast<int>(cos.cols());

  Eigen::VectorXd den1(n1), den2(n2);
  std::vector<double> buf;
  for (int i = 0; i < n1; ++i) {
    buf.assign(cos.row(i).begin(), cos.row(i).end());
    den1(i) = half_mean_top_k(buf, k);
  }
  for (int j = 0; j < n2; ++j) {
    buf.assign(cos.col(j).begin(), cos.col(j).end());
    den2(j) = half_mean_top_k(buf, k);
  }

  Eigen::MatrixXd margin(n1, n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const double den = den1(i) + den2(j);
      margin(i, j) = den == 0.0 ? 0.0 : cos(i, j) / den;
    }
  return margin;
}

std::vector<std::pair<int, int>> mutual_top(const Eigen::MatrixXd& margin) {
  const int n1 = static_cast<int>(margin.rows());
  const int n2 = static_cast<int>(margin.cols());
  std::vector<int> best_col(n1), best_row(n2);
  for (int i = 0; i < n1; ++i) {
    int best = 0;
    for (int j = 1; j < n2; ++j)
      if (margin(i, j) > margin(i, best)) best = j;  // ties keep lowest j
    best_col[i] = best;
  }
  for (int j = 0; j < n2; ++j) {
    int best = 0;
    for (int i = 1; i < n1; ++i)
      if (margin(i, j) > margin(best, j)) best = i;
    best_row[j] = best;
  }
  std::vector<std::pair<int, int>> accepted;
  for (int i = 0; i < n1; ++i)
    if (best_row[best_col[i]] == i) accepted.emplace_back(i, best_col[i]);
  return accepted;
}

SelectResult select_pairs_reps(const Eigen::MatrixXd& cw_l1,
                               const Eigen::MatrixXd& ch_l1,
                               const Eigen::MatrixXd& cw_l2,
                               const Eigen::MatrixXd& ch_l2, int k,
                               std::int64_t model_version) {
  SelectResult res;
  res.model_version = model_version;
  res.margin_w = margin_matrix(cw_l1, cw_l2, k);
  res.margin_h = margin_matrix(ch_l1, ch_l2, k);
  res.acc_w = mutual_top(res.margin_w);
  res.acc_h = mutual_top(res.margin_h);

  // Dual acceptance is the plain intersection of the two channel sets.
  const std::int64_t n2 = cw_l2.rows();
  std::unordered_set<std::int64_t> w_set;
  for (const auto& [i, j] : res.acc_w)
    w_set.insert(static_cast<std::int64_t>(i) * n2 + j);
  for (const auto& [i, j] : res.acc_h)
    if (w_set.count(static_cast<std::int64_t>(i) * n2 + j))
      res.acc_dual.emplace_back(i, j);
  return res;
}

SelectResult select_pairs(const EncoderModel& model, const Document& doc_l1,
                          const Document& doc_l2, int k) {
  const int n1 = static_cast<int>(doc_l1.sentences.size());
  const int n2 = static_cast<int>(doc_l2.sentences.size());
  if (n1 == 0 || n2 == 0)
    throw std::runtime_error("no candidates");

  Eigen::MatrixXd cw1(n1, model.hyper.d), ch1(n1, model.hyper.d_h);
  Eigen::MatrixXd cw2(n2, model.hyper.d), ch2(n2, model.hyper.d_h);
  for (int i = 0; i < n1; ++i) {
    const SentenceRepr r = represent(model, doc_l1.sentences[i]);
    cw1.row(i) = r.cw.transpose();
    ch1.row(i) = r.ch.transpose();
  }
  for (int j = 0; j < n2; ++j) {
    const SentenceRepr r = represent(model, doc_l2.sentences[j]);
    cw2.row(j) = r.cw.transpose();
    ch2.row(j) = r.ch.transpose();
  }
  return select_pairs_reps(cw1, ch1, cw2, ch2, k, model.version);
}

namespace {

std::string token_pair_key(const Sentence& a, const Sentence& b) {
  std::string key;
  for (const auto& t : a.tokens) {
    key += t;
    key.push_back('\x1e');
  }
  key.push_back('\x1f');
  for (const auto& t : b.tokens) {
    key += t;
    key.push_back('\x1e');
  }
  return key;
}

struct ScoredDocPair {
  std::int64_t version = -1;
  SelectResult result;
};

}  // namespace

RunResult run_loop(const ComparableCorpus& corpus, EncoderModel initial,
                   const MinerConfig& config, const LogSink& sink) {
  if (corpus.doc_pairs.empty())
    throw std::runtime_error("corpus has no document pairs");

  RunResult out;
  auto model = std::make_shared<const EncoderModel>(std::move(initial));
  Rng rng(config.seed);

  const int epochs = config.score_only ? 1 : config.epochs;
  std::int64_t step = 0;
  std::vector<BatchPair> buffer;
  std::unordered_set<std::string> seen_all;
  const bool has_truth = !corpus.truth.empty();

  auto train_on_buffer = [&](EpochStats& stats) {
    if (buffer.empty() || config.score_only) return;
    model = std::make_shared<const EncoderModel>(
        train_step(*model, buffer, rng));
    buffer.clear();
    ++stats.train_steps;
  };

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    std::vector<std::pair<SentRef, SentRef>> epoch_unique;
    std::unordered_set<std::string> seen_epoch;

    std::vector<int> order(corpus.doc_pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    rng.shuffle(order);

    // Upcoming document pairs are scored speculatively against the current
    // snapshot; results computed against a stale version are redone, so the
    // output does not depend on the thread count.
    std::deque<std::future<ScoredDocPair>> pipeline;
    std::size_t next_launch = 0;
    const std::size_t lookahead =
        config.threads > 1 ? static_cast<std::size_t>(config.threads) : 0;

    // Invariant: pipeline.front() always belongs to the position about to
    // be consumed.
    auto launch = [&](std::size_t pos) {
      auto snapshot = model;
      const auto [di, dj] = corpus.doc_pairs[order[pos]];
      return std::async(std::launch::async,
                        [snapshot, &corpus, di, dj, k = config.k]() {
                          ScoredDocPair scored;
                          scored.version = snapshot->version;
                          scored.result = select_pairs(
                              *snapshot, corpus.docs_l1[di],
                              corpus.docs_l2[dj], k);
                          return scored;
                        });
    };

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      while (lookahead > 0 && pipeline.size() < lookahead &&
             next_launch < order.size())
        pipeline.push_back(launch(next_launch++));

      const auto [di, dj] = corpus.doc_pairs[order[pos]];
      const Document& d1 = corpus.docs_l1[di];
      const Document& d2 = corpus.docs_l2[dj];

      SelectResult res;
      if (lookahead > 0) {
        ScoredDocPair scored = pipeline.front().get();
        pipeline.pop_front();
        res = scored.version == model->version
                  ? std::move(scored.result)
                  : select_pairs(*model, d1, d2, config.k);
      } else {
        res = select_pairs(*model, d1, d2, config.k);
      }

      const int n2 = static_cast<int>(d2.sentences.size());
      std::vector<std::uint8_t> w_flag(d1.sentences.size() * n2, 0),
          h_flag(d1.sentences.size() * n2, 0),
          dual_flag(d1.sentences.size() * n2, 0);
      for (const auto& [i, j] : res.acc_w) w_flag[i * n2 + j] = 1;
      for (const auto& [i, j] : res.acc_h) h_flag[i * n2 + j] = 1;
      for (const auto& [i, j] : res.acc_dual) dual_flag[i * n2 + j] = 1;

      for (int i = 0; i < static_cast<int>(d1.sentences.size()); ++i) {
        for (int j = 0; j < n2; ++j) {
          const bool aw = w_flag[i * n2 + j], ah = h_flag[i * n2 + j];
          const bool dual = dual_flag[i * n2 + j];
          if (!dual && !aw && !ah && !config.log_rejects) continue;

          const Sentence& s1 = d1.sentences[i];
          const Sentence& s2 = d2.sentences[j];
          LogRecord rec;
          rec.epoch = epoch;
          rec.model_version = res.model_version;
          rec.key = {{s1.doc_id, s1.line_id}, {s2.doc_id, s2.line_id}};
          rec.score_w = res.margin_w(i, j);
          rec.score_h = res.margin_h(i, j);
          rec.acc_w = aw;
          rec.acc_h = ah;
          rec.acc_dual = dual;
          rec.is_true = has_truth ? (corpus.truth.count(rec.key) ? 1 : 0) : -1;

          if (dual) {
            rec.step = ++step;
            ++stats.accepted;
            const std::string tkey = token_pair_key(s1, s2);
            if (seen_epoch.insert(tkey).second)
              epoch_unique.push_back({{di, i}, {dj, j}});
            if (seen_all.insert(tkey).second)
              out.all_unique.push_back({{di, i}, {dj, j}});
            buffer.push_back({std::vector<int>(s1.token_ids.begin() + 1,
                                               s1.token_ids.end()),
                              std::vector<int>(s2.token_ids.begin() + 1,
                                               s2.token_ids.end())});
          } else {
            rec.step = step;
          }
          if (sink) sink(rec);
          if (dual && static_cast<int>(buffer.size()) >= config.batch_size) {
            train_on_buffer(stats);
            if (lookahead > 0) {
              pipeline.clear();  // speculated against a stale version
              next_launch = pos + 1;
            }
          }
        }
      }
    }

    train_on_buffer(stats);  // flush the epoch remainder
    stats.unique_accepted = static_cast<std::int64_t>(epoch_unique.size());
    if (stats.accepted == 0)
      out.warnings.push_back("epoch " + std::to_string(epoch) +
                             ": no pairs accepted");
    out.epochs.push_back(stats);
    out.epoch_unique.push_back(std::move(epoch_unique));
  }

  out.model = model;
  out.total_steps = step;
  return out;
}

const char* kMiningLogHeader =
    "epoch\tstep\tmodel_version\tdoc_id_l1\tline_l1\tdoc_id_l2\tline_l2\t"
    "score_w\tscore_h\tacc_w\tacc_h\tacc_dual\tis_true_pair";

std::string format_log_record(const LogRecord& r) {
  char num[64];
  std::string line;
  line.reserve(128);
  auto add_int = [&](std::int64_t v) {
    std::snprintf(num, sizeof num, "%" PRId64, v);
    line += num;
    line.push_back('\t');
  };
  auto add_float = [&](double v) {
    std::snprintf(num, sizeof num, "%.10g", v);
    line += num;
    line.push_back('\t');
  };
  add_int(r.epoch);
  add_int(r.step);
  add_int(r.model_version);
  line += r.key.l1.doc_id;
  line.push_back('\t');
  add_int(r.key.l1.line_id);
  line += r.key.l2.doc_id;
  line.push_back('\t');
  add_int(r.key.l2.line_id);
  add_float(r.score_w);
  add_float(r.score_h);
  add_int(r.acc_w ? 1 : 0);
  add_int(r.acc_h ? 1 : 0);
  add_int(r.acc_dual ? 1 : 0);
  line += r.is_true < 0 ? "NA" : (r.is_true ? "1" : "0");
  return line;
}

std::vector<LogRecord> read_mining_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<LogRecord> records;
  std::string line;
  if (!std::getline(in, line) || line != kMiningLogHeader)
    throw std::runtime_error("not a mining log: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 13)
      throw std::runtime_error("malformed mining log row: " + line);
    LogRecord r;
    r.epoch = std::stoi(cols[0]);
    r.step = std::stoll(cols[1]);
    r.model_version = std::stoll(cols[2]);
    r.key = {{cols[3], std::stoi(cols[4])}, {cols[5], std::stoi(cols[6])}};
    r.score_w = std::stod(cols[7]);
    r.score_h = std::stod(cols[8]);
    r.acc_w = cols[9] == "1";
    r.acc_h = cols[10] == "1";
    r.acc_dual = cols[11] == "1";
    r.is_true = cols[12] == "NA" ? -1 : (cols[12] == "1" ? 1 : 0);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace ssmine
