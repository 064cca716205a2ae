#pragma once

#include <string>
#include <vector>

#include "ssmine/config.hpp"
#include "ssmine/curriculum.hpp"
#include "ssmine/embeddings.hpp"
#include "ssmine/encoder.hpp"
#include "ssmine/evalx.hpp"
#include "ssmine/miner.hpp"
#include "ssmine/synthcorp.hpp"
#include "ssmine/textprep.hpp"

namespace ssmine {

// Fixed stage tags for seed derivation; every pipeline stage draws from its
// own stream so stages stay independently reproducible.
enum class Stage : std::uint64_t {
  synth = 0,
  skipgram_l1 = 1,
  skipgram_l2 = 2,
  encoder_init = 3,
  mining = 4,
};

inline std::uint64_t stage_seed(const ExperimentConfig& config, Stage stage) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(stage));
}

struct PreparedData {
  BpeModel bpe;
  ComparableCorpus corpus;
  std::vector<std::string> id_to_token;
  // Content-token id streams and frequencies per language.
  std::vector<std::vector<int>> stream_l1, stream_l2;
  std::vector<long long> freq_l1, freq_l2;
  std::unordered_map<std::string, long long> token_freq_l1, token_freq_l2;
};

// Reads the corpus files named by the config, learns the BPE model (or
// loads it when bpe_model points at an existing file), builds the processed
// corpus and attaches ground truth when truth_file is set.
PreparedData prepare(const ExperimentConfig& config);

// Same, over in-memory raw documents (used by synth-driven runs).
PreparedData prepare(const ExperimentConfig& config,
                     const std::vector<RawDocument>& raw_l1,
                     const std::vector<RawDocument>& raw_l2,
                     const std::vector<std::pair<std::string, std::string>>&
                         doc_pairs,
                     const std::set<PairKey>& truth);

// Skip-gram per language, identical-token seed dictionary, orthogonal
// alignment of L2 into L1 space, merged into one unit-normalized table over
// the shared vocabulary. When embeddings_file is set the table is loaded
// from disk instead and training is skipped.
EmbeddingTable build_aligned_embeddings(const PreparedData& data,
                                        const ExperimentConfig& config);

EncoderModel make_encoder(const EmbeddingTable& pretrained,
                          const ExperimentConfig& config);

MinerConfig miner_config(const ExperimentConfig& config);

// Writes extracted.epochN.l1/.l2 plus extracted.all.* (detokenized surface
// text) into dir.
void write_exports(const std::string& dir, const ComparableCorpus& corpus,
                   const RunResult& run);

// resolved.cfg + provenance.txt (tool version, seed, input checksums).
void write_provenance(const std::string& dir, const ExperimentConfig& config,
                      const std::vector<std::string>& input_files);

extern const char* kToolVersion;

}  // namespace ssmine
