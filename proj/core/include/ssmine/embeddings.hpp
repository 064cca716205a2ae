#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace ssmine {

struct EmbeddingTable {
  Eigen::MatrixXd matrix;  // |vocab| x d, row per token id
  int dim = 0;
  bool unit_normalized = false;

  int rows() const { return static_cast<int>(matrix.rows()); }
  Eigen::VectorXd row(int id) const { return matrix.row(id).transpose(); }

  // L2-normalizes every row in place (zero rows stay zero) and sets the flag.
  void normalize_rows();
};

struct SkipgramConfig {
  int dim = 32;
  int window = 3;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;
};

// Skip-gram with negative sampling, plain SGD, single-threaded and
// deterministic for a given seed. `sentences` are token-id sequences over a
// vocabulary of `vocab_size` ids; ids never observed keep their random
// initialization. Throws if fewer than two distinct ids occur.
EmbeddingTable train_skipgram(const std::vector<std::vector<int>>& sentences,
                              int vocab_size, const SkipgramConfig& config);

// Negative-sampling loss for one (center, context, negatives) event:
//   -log sigma(u_ctx . v_c) - sum_n log sigma(-u_n . v_c)
// Exposed so the gradient can be checked against finite differences.
double sgns_loss(const Eigen::MatrixXd& input, const Eigen::MatrixXd& output,
                 int center, int context, const std::vector<int>& negatives);

// Analytic gradients of sgns_loss with respect to the touched rows.
void sgns_grad(const Eigen::MatrixXd& input, const Eigen::MatrixXd& output,
               int center, int context, const std::vector<int>& negatives,
               Eigen::VectorXd& grad_center,
               std::vector<Eigen::VectorXd>& grad_outputs);

// All surface forms present in both frequency maps, sorted by combined
// frequency (descending, ties lexicographic), truncated to top_n.
// Throws "no seed dictionary..." when the intersection is empty.
std::vector<std::pair<std::string, std::string>> seed_dictionary(
    const std::unordered_map<std::string, long long>& freq_l1,
    const std::unordered_map<std::string, long long>& freq_l2, int top_n);

// Orthogonal map W minimizing sum ||W e_src - e_tgt||^2 over the dictionary
// pairs (given as row indices into the two tables). Pair vectors are
// unit-normalized before the SVD so the objective is mean cosine. Throws on
// fewer than two pairs or a rank-deficient cross-covariance.
Eigen::MatrixXd procrustes_align(
    const EmbeddingTable& src, const EmbeddingTable& tgt,
    const std::vector<std::pair<int, int>>& dictionary);

// Merges two per-language tables over one shared vocabulary into a single
// aligned table: L2 rows are premapped by W, tokens seen in both corpora get
// the frequency-weighted average. Rows end up unit-normalized.
EmbeddingTable merge_aligned(const EmbeddingTable& table_l1,
                             const EmbeddingTable& table_l2,
                             const Eigen::MatrixXd& map_l2_to_l1,
                             const std::vector<long long>& freq_l1,
                             const std::vector<long long>& freq_l2);

// Text format: header "<count> <dim>", then "token v1 ... vd" per line.
void save_embeddings(const std::string& path, const EmbeddingTable& table,
                     const std::vector<std::string>& id_to_token);
EmbeddingTable load_embeddings(
    const std::string& path,
    const std::unordered_map<std::string, int>& vocab, int vocab_size);

}  // namespace ssmine
