#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ssmine {

// Every knob of the pipeline. Defaults follow the reference setup where one
// exists (k=4, batch 50, length filter 6..50, ratio 1:4, 1k-step windows);
// the rest are desk-scale choices. Keys are flat and globally unique; the
// config file groups them under section headers for readability only.
struct ExperimentConfig {
  // [paths]
  std::string corpus_l1, corpus_l2;
  std::string pairs_file;
  std::string truth_file;
  std::string parallel_l1, parallel_l2;  // synth input
  std::string bpe_model;                 // learned by prep, consumed later
  std::string embeddings_file;           // written by embed, consumed by mine
  std::string mining_log;                // written by mine, consumed by eval/report
  std::string out_root = "experiments";
  std::string lang_l1 = "l1";
  std::string lang_l2 = "l2";

  // [textprep]
  int n_merges = 4000;
  int min_len = 6;
  int max_len = 50;

  // [embeddings]
  int emb_dim = 32;
  int emb_window = 3;
  int emb_negatives = 5;
  int emb_epochs = 5;
  double emb_lr = 0.025;
  int seed_dict_size = 1000;

  // [encoder]
  int d_h = 0;  // 0: same as emb_dim
  double enc_lr = 0.05;
  double gamma = 0.2;
  int enc_negatives = 5;
  double enc_init_gain = 6.0;
  double enc_init_bias = 0.0;

  // [miner]
  int k = 4;
  int batch_size = 50;
  int epochs = 8;
  bool log_rejects = false;
  bool score_only = false;
  int threads = 1;

  // [synth]
  int n_true = 2000;
  double ratio = 4.0;
  int article_len = 28;

  // [curriculum]
  int lm_order = 3;
  int window = 1000;

  // [run]
  std::uint64_t seed = 1;

  int hidden_dim() const { return d_h > 0 ? d_h : emb_dim; }

  // Applies `key=value`; throws on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  // All keys in a fixed order, for flag registration and serialization.
  static const std::vector<std::string>& keys();

  // Current value of a key, as written by resolved().
  std::string get(const std::string& key) const;

  // The full configuration in file form (section headers included).
  std::string resolved() const;
};

// Parses the flat key=value format: blank lines and `#` comments ignored,
// `[section]` headers ignored, everything else must be `key=value`.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

// FNV-1a 64 of a file's bytes, as a hex string; used for input provenance.
std::string file_checksum(const std::string& path);

}  // namespace ssmine
