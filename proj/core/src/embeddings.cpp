#include "ssmine/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "ssmine/rng.hpp"

namespace ssmine {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// word2vec-style unigram table raised to the 3/4 power.
std::vector<int> build_unigram_table(const std::vector<long long>& counts,
                                     int table_size) {
  std::vector<int> table;
  table.reserve(table_size);
  double total = 0.0;
  for (std::size_t id = 0; id < counts.size(); ++id)
    if (counts[id] > 0) total += std::pow(static_cast<double>(counts[id]), 0.75);
  double cum = 0.0;
  std::size_t id = 0;
  while (counts[id] == 0) ++id;
  cum = std::pow(static_cast<double>(counts[id]), 0.75) / total;
  for (int i = 0; i < table_size; ++i) {
    table.push_back(static_cast<int>(id));
    if ((i + 1.0) / table_size > cum) {
      do {
        ++id;
      } while (id < counts.size() && counts[id] == 0);
      if (id >= counts.size()) {
        id = counts.size() - 1;
        while (counts[id] == 0) --id;
        cum = 1.0;
      } else {
        cum += std::pow(static_cast<double>(counts[id]), 0.75) / total;
      }
    }
  }
  return table;
}

}  // namespace

void EmbeddingTable::normalize_rows() {
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const double n = matrix.row(i).norm();
    if (n > 0.0) matrix.row(i) /= n;
  }
  unit_normalized = true;
}

double sgns_loss(const Eigen::MatrixXd& input, const Eigen::MatrixXd& output,
                 int center, int context, const std::vector<int>& negatives) {
  const Eigen::VectorXd v = input.row(center).transpose();
  double loss = -std::log(sigmoid(output.row(context).dot(v)));
  for (int n : negatives)
    loss += -std::log(sigmoid(-output.row(n).dot(v)));
  return loss;
}

void sgns_grad(const Eigen::MatrixXd& input, const Eigen::MatrixXd& output,
               int center, int context, const std::vector<int>& negatives,
               Eigen::VectorXd& grad_center,
               std::vector<Eigen::VectorXd>& grad_outputs) {
  const Eigen::VectorXd v = input.row(center).transpose();
  grad_center = Eigen::VectorXd::Zero(input.cols());
  grad_outputs.assign(negatives.size() + 1,
                      Eigen::VectorXd::Zero(input.cols()));
  // d/dx of -log sigma(x) is sigma(x) - 1; of -log sigma(-x) is sigma(x).
  {
    const double g = sigmoid(output.row(context).dot(v)) - 1.0;
    grad_center += g * output.row(context).transpose();
    grad_outputs[0] = g * v;
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    const double g = sigmoid(output.row(negatives[i]).dot(v));
    grad_center += g * output.row(negatives[i]).transpose();
    grad_outputs[i + 1] = g * v;
  }
}

EmbeddingTable train_skipgram(const std::vector<std::vector<int>>& sentences,
                              int vocab_size, const SkipgramConfig& config) {
  if (vocab_size < 1) throw std::invalid_argument("vocab_size must be >= 1");
  if (config.dim < 2) throw std::invalid_argument("dim must be >= 2");

  std::vector<long long> counts(vocab_size, 0);
  long long total_tokens = 0;
  for (const auto& sent : sentences)
    for (int id : sent) {
      if (id < 0 || id >= vocab_size)
        throw std::out_of_range("token id outside vocab");
      ++counts[id];
      ++total_tokens;
    }
  const int distinct =
      static_cast<int>(std::count_if(counts.begin(), counts.end(),
                                     [](long long c) { return c > 0; }));
  if (distinct < 2)
    throw std::runtime_error("vocab of size < 2: no negatives possible");

  Rng rng(config.seed);
  EmbeddingTable table;
  table.dim = config.dim;
  table.matrix.resize(vocab_size, config.dim);
  for (int i = 0; i < vocab_size; ++i)
    for (int j = 0; j < config.dim; ++j)
      table.matrix(i, j) = (rng.uniform() - 0.5) / config.dim;
  if (config.epochs == 0) return table;

  Eigen::MatrixXd output = Eigen::MatrixXd::Zero(vocab_size, config.dim);
  const auto unigram = build_unigram_table(counts, 1 << 20);

  const long long total_updates =
      static_cast<long long>(config.epochs) * total_tokens;
  long long processed = 0;
  Eigen::VectorXd v_new(config.dim);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& sent : sentences) {
      const int len = static_cast<int>(sent.size());
      for (int t = 0; t < len; ++t) {
        const double alpha =
            config.lr *
            std::max(1.0 - static_cast<double>(processed) / total_updates,
                     1e-4);
        ++processed;
        const int center = sent[t];
        const int lo = std::max(0, t - config.window);
        const int hi = std::min(len - 1, t + config.window);
        for (int c = lo; c <= hi; ++c) {
          if (c == t) continue;
          const int context = sent[c];
          auto v = table.matrix.row(center);
          v_new = v.transpose();
          // Positive update.
          {
            const double g =
                (sigmoid(output.row(context).dot(v)) - 1.0) * alpha;
            v_new -= g * output.row(context).transpose();
            output.row(context) -= g * v;
          }
          // Negative samples; the true context is skipped, not resampled.
          for (int n = 0; n < config.negatives; ++n) {
            const int neg =
                unigram[rng.below(static_cast<std::uint64_t>(unigram.size()))];
            if (neg == context) continue;
            const double g = sigmoid(output.row(neg).dot(v)) * alpha;
            v_new -= g * output.row(neg).transpose();
            output.row(neg) -= g * v;
          }
          table.matrix.row(center) = v_new.transpose();
        }
      }
    }
  }

  if (!table.matrix.allFinite())
    throw std::runtime_error("skip-gram training diverged (NaN/Inf)");
  return table;
}

std::vector<std::pair<std::string, std::string>> seed_dictionary(
    const std::unordered_map<std::string, long long>& freq_l1,
    const std::unordered_map<std::string, long long>& freq_l2, int top_n) {
  struct Entry {
    long long combined;
    std::string token;
  };
  std::vector<Entry> shared;
  for (const auto& [tok, f1] : freq_l1) {
    auto it = freq_l2.find(tok);
    if (it != freq_l2.end()) shared.push_back({f1 + it->second, tok});
  }
  if (shared.empty())
    throw std::runtime_error(
        "no seed dictionary; languages may not share script");
  std::sort(shared.begin(), shared.end(), [](const Entry& a, const Entry& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.token < b.token;
  });
  if (top_n > 0 && static_cast<int>(shared.size()) > top_n)
    shared.resize(top_n);
  std::vector<std::pair<std::string, std::string>> dict;
  dict.reserve(shared.size());
  for (const auto& e : shared) dict.emplace_back(e.token, e.token);
  return dict;
}

Eigen::MatrixXd procrustes_align(
    const EmbeddingTable& src, const EmbeddingTable& tgt,
    const std::vector<std::pair<int, int>>& dictionary) {
  const int d = src.dim;
  if (tgt.dim != d) throw std::invalid_argument("dimension mismatch");
  if (dictionary.size() < 2)
    throw std::runtime_error("degenerate seed dictionary");

  // Cross-covariance of unit-normalized pair vectors: maximizing
  // tr(W M) with M = sum x y^T then gives the mean-cosine optimum.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [si, ti] : dictionary) {
    Eigen::VectorXd x = src.matrix.row(si).transpose();
    Eigen::VectorXd y = tgt.matrix.row(ti).transpose();
    const double nx = x.norm(), ny = y.norm();
    if (nx == 0.0 || ny == 0.0) continue;
    m += (x / nx) * (y / ny).transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(d - 1) < 1e-10 * sv(0))
    throw std::runtime_error("degenerate seed dictionary");
  return svd.matrixV() * svd.matrixU().transpose();
}

EmbeddingTable merge_aligned(const EmbeddingTable& table_l1,
                             const EmbeddingTable& table_l2,
                             const Eigen::MatrixXd& map_l2_to_l1,
                             const std::vector<long long>& freq_l1,
                             const std::vector<long long>& freq_l2) {
  EmbeddingTable merged;
  merged.dim = table_l1.dim;
  merged.matrix = table_l1.matrix;
  const Eigen::MatrixXd mapped = table_l2.matrix * map_l2_to_l1.transpose();
  for (int id = 0; id < merged.rows(); ++id) {
    const long long f1 = freq_l1[id], f2 = freq_l2[id];
    if (f1 > 0 && f2 > 0) {
      const double w1 = static_cast<double>(f1) / (f1 + f2);
      merged.matrix.row(id) =
          w1 * table_l1.matrix.row(id) + (1.0 - w1) * mapped.row(id);
    } else if (f2 > 0) {
      merged.matrix.row(id) = mapped.row(id);
    }
    // f1 > 0 or never seen: keep the L1 row (random init for unseen ids).
  }
  merged.normalize_rows();
  return merged;
}

void save_embeddings(const std::string& path, const EmbeddingTable& table,
                     const std::vector<std::string>& id_to_token) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << table.rows() << ' ' << table.dim << "\n";
  for (int i = 0; i < table.rows(); ++i) {
    out << id_to_token[i];
    for (int j = 0; j < table.dim; ++j) out << ' ' << table.matrix(i, j);
    out << "\n";
  }
}

EmbeddingTable load_embeddings(
    const std::string& path,
    const std::unordered_map<std::string, int>& vocab, int vocab_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  long long count = 0;
  int dim = 0;
  if (!(in >> count >> dim) || dim < 1)
    throw std::runtime_error("bad embedding header: " + path);
  EmbeddingTable table;
  table.dim = dim;
  table.matrix = Eigen::MatrixXd::Zero(vocab_size, dim);
  std::string token;
  for (long long i = 0; i < count; ++i) {
    if (!(in >> token)) throw std::runtime_error("truncated embeddings");
    auto it = vocab.find(token);
    for (int j = 0; j < dim; ++j) {
      double v;
      if (!(in >> v)) throw std::runtime_error("truncated embeddings");
      if (it != vocab.end()) table.matrix(it->second, j) = v;
    }
  }
  if (!table.matrix.allFinite())
    throw std::runtime_error("NaN/Inf in embedding file: " + path);
  return table;
}

}  // namespace ssmine
