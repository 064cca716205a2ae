#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ssmine/textprep.hpp"

namespace ssmine {

struct SynthConfig {
  int n_true = 2000;
  double ratio = 4.0;     // false pairs per true pair
  int article_len = 28;   // sentences per pseudo-article (L1 side)
  std::uint64_t seed = 1;
  int max_oversample = 100;  // cap on n_false / remainder size
};

// A raw comparable corpus with known pair labels, ready for textprep.
struct SyntheticCorpus {
  std::vector<RawDocument> docs_l1, docs_l2;
  std::vector<std::pair<std::string, std::string>> doc_pairs;
  std::set<PairKey> truth;
  std::set<PairKey> false_pairs;  // where the deranged samples were placed
  int n_true = 0;
  int n_false = 0;
};

// Builds a labeled pseudo-comparable corpus from a parallel one: n_true
// pairs are kept aligned, the target sides of the remainder are deranged
// (no sentence keeps its own translation, checked at text level) and
// oversampled with replacement until false:true reaches the ratio. Samples
// are shuffled and cut into pseudo-article pairs of article_len sentences;
// a true pair's two sides always land in the same article pair.
SyntheticCorpus build_synthetic(
    const std::vector<std::pair<std::string, std::string>>& parallel,
    const SynthConfig& config);

// truth.tsv: header + (doc_id_l1, line_l1, doc_id_l2, line_l2) rows.
void write_truth(const std::string& path, const std::set<PairKey>& truth);
std::set<PairKey> read_truth(const std::string& path);

// The textprep corpus format (#DOC markers).
void write_raw_corpus(const std::string& path,
                      const std::vector<RawDocument>& docs);
void write_doc_pairs(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace ssmine
