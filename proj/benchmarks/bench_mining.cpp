#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "ssmine/encoder.hpp"
#include "ssmine/miner.hpp"
#include "ssmine/rng.hpp"
#include "ssmine/textprep.hpp"

using namespace ssmine;

namespace {

Eigen::MatrixXd random_reps(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.gaussian();
  return m;
}

// Cross-product scoring of one document pair: the mining hot path.
void bm_margin_matrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd r1 = random_reps(n, 32, 1);
  const Eigen::MatrixXd r2 = random_reps(n, 32, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(margin_matrix(r1, r2, 4));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(bm_margin_matrix)->Arg(16)->Arg(28)->Arg(64)->Arg(256);

void bm_select_pairs_reps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd cw1 = random_reps(n, 32, 1);
  const Eigen::MatrixXd ch1 = random_reps(n, 32, 2);
  const Eigen::MatrixXd cw2 = random_reps(n, 32, 3);
  const Eigen::MatrixXd ch2 = random_reps(n, 32, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_pairs_reps(cw1, ch1, cw2, ch2, 4));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(bm_select_pairs_reps)->Arg(28)->Arg(128);

void bm_represent(benchmark::State& state) {
  const int len = static_cast<int>(state.range(0));
  EncoderHyper hyper;
  hyper.d = 32;
  hyper.d_h = 32;
  EmbeddingTable emb;
  emb.dim = 32;
  emb.matrix = random_reps(2000, 32, 5);
  const EncoderModel model = EncoderModel::init(emb, hyper, 6);
  Rng rng(7);
  std::vector<int> ids(len);
  for (auto& id : ids) id = rng.index(2000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(represent_ids(model, ids));
  }
  state.SetItemsProcessed(state.iterations() * len);
}
BENCHMARK(bm_represent)->Arg(10)->Arg(25)->Arg(50);

void bm_bpe_apply(benchmark::State& state) {
  Rng rng(8);
  std::vector<std::string> corpus;
  const std::string alphabet = "abcdefghij";
  for (int i = 0; i < 4000; ++i) {
    std::string word;
    const int len = 3 + rng.index(9);
    for (int j = 0; j < len; ++j)
      word.push_back(alphabet[rng.index(alphabet.size())]);
    corpus.push_back(word);
  }
  const BpeModel model = BpeModel::learn({corpus}, 2000);
  // Every word is new to the model, so this measures segmentation rather
  // than the per-word cache.
  std::uint64_t counter = 0;
  std::string word;
  for (auto _ : state) {
    word.clear();
    const int len = 3 + rng.index(9);
    for (int j = 0; j < len; ++j)
      word.push_back(alphabet[rng.index(alphabet.size())]);
    word += std::to_string(counter++);
    benchmark::DoNotOptimize(model.apply(word));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_bpe_apply);

}  // namespace

BENCHMARK_MAIN();
