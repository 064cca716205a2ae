#include "ssmine/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace ssmine {

const char* kToolVersion = "ssmine 0.1.0";

namespace {

void fill_streams(PreparedData& data) {
  const int vocab = data.bpe.vocab_size();
  data.freq_l1.assign(vocab, 0);
  data.freq_l2.assign(vocab, 0);
  auto collect = [](const std::vector<Document>& docs,
                    std::vector<std::vector<int>>& stream,
                    std::vector<long long>& freq,
                    std::unordered_map<std::string, long long>& token_freq) {
    for (const auto& doc : docs)
      for (const auto& sent : doc.sentences) {
        std::vector<int> ids(sent.token_ids.begin() + 1,
                             sent.token_ids.end());
        for (std::size_t t = 1; t < sent.tokens.size(); ++t) {
          ++freq[sent.token_ids[t]];
          ++token_freq[sent.tokens[t]];
        }
        stream.push_back(std::move(ids));
      }
  };
  collect(data.corpus.docs_l1, data.stream_l1, data.freq_l1,
          data.token_freq_l1);
  collect(data.corpus.docs_l2, data.stream_l2, data.freq_l2,
          data.token_freq_l2);

  data.id_to_token.assign(vocab, "");
  for (const auto& [token, id] : data.bpe.vocab()) data.id_to_token[id] = token;
}

PreparedData prepare_impl(
    const ExperimentConfig& config, const std::vector<RawDocument>& raw_l1,
    const std::vector<RawDocument>& raw_l2,
    const std::vector<std::pair<std::string, std::string>>& doc_pairs,
    const std::set<PairKey>& truth) {
  std::vector<std::vector<std::string>> word_corpus;
  for (const auto* side : {&raw_l1, &raw_l2})
    for (const auto& doc : *side)
      for (const auto& line : doc.lines) word_corpus.push_back(tokenize(line));

  PreparedData data;
  if (!config.bpe_model.empty() &&
      std::filesystem::exists(config.bpe_model)) {
    data.bpe = BpeModel::load(config.bpe_model, word_corpus);
  } else {
    data.bpe = BpeModel::learn(word_corpus, config.n_merges);
  }
  data.corpus = build_corpus(raw_l1, config.lang_l1, raw_l2, config.lang_l2,
                             doc_pairs, data.bpe, config.min_len,
                             config.max_len);
  data.corpus.truth = truth;
  fill_streams(data);
  return data;
}

}  // namespace

PreparedData prepare(const ExperimentConfig& config) {
  if (config.corpus_l1.empty() || config.corpus_l2.empty() ||
      config.pairs_file.empty())
    throw std::runtime_error(
        "corpus_l1, corpus_l2 and pairs_file must be configured");
  const auto raw_l1 = read_raw_corpus(config.corpus_l1);
  const auto raw_l2 = read_raw_corpus(config.corpus_l2);
  const auto pairs = read_doc_pairs(config.pairs_file);
  std::set<PairKey> truth;
  if (!config.truth_file.empty()) truth = read_truth(config.truth_file);
  return prepare_impl(config, raw_l1, raw_l2, pairs, truth);
}

PreparedData prepare(const ExperimentConfig& config,
                     const std::vector<RawDocument>& raw_l1,
                     const std::vector<RawDocument>& raw_l2,
                     const std::vector<std::pair<std::string, std::string>>&
                         doc_pairs,
                     const std::set<PairKey>& truth) {
  return prepare_impl(config, raw_l1, raw_l2, doc_pairs, truth);
}

EmbeddingTable build_aligned_embeddings(const PreparedData& data,
                                        const ExperimentConfig& config) {
  if (!config.embeddings_file.empty() &&
      std::filesystem::exists(config.embeddings_file)) {
    EmbeddingTable table = load_embeddings(
        config.embeddings_file, data.bpe.vocab(), data.bpe.vocab_size());
    table.normalize_rows();
    return table;
  }

  SkipgramConfig sg;
  sg.dim = config.emb_dim;
  sg.window = config.emb_window;
  sg.negatives = config.emb_negatives;
  sg.epochs = config.emb_epochs;
  sg.lr = config.emb_lr;

  sg.seed = stage_seed(config, Stage::skipgram_l1);
  const EmbeddingTable table_l1 =
      train_skipgram(data.stream_l1, data.bpe.vocab_size(), sg);
  sg.seed = stage_seed(config, Stage::skipgram_l2);
  const EmbeddingTable table_l2 =
      train_skipgram(data.stream_l2, data.bpe.vocab_size(), sg);

  const auto dict_tokens = seed_dictionary(
      data.token_freq_l1, data.token_freq_l2, config.seed_dict_size);
  std::vector<std::pair<int, int>> dict_ids;
  dict_ids.reserve(dict_tokens.size());
  for (const auto& [tok_l2, tok_l1] : dict_tokens)
    dict_ids.emplace_back(data.bpe.token_id(tok_l2),
                          data.bpe.token_id(tok_l1));

  const Eigen::MatrixXd w = procrustes_align(table_l2, table_l1, dict_ids);
  return merge_aligned(table_l1, table_l2, w, data.freq_l1, data.freq_l2);
}

EncoderModel make_encoder(const EmbeddingTable& pretrained,
                          const ExperimentConfig& config) {
  EncoderHyper hyper;
  hyper.d = config.emb_dim;
  hyper.d_h = config.hidden_dim();
  hyper.lr = config.enc_lr;
  hyper.margin_loss_gamma = config.gamma;
  hyper.negatives_per_pair = config.enc_negatives;
  hyper.init_gain = config.enc_init_gain;
  hyper.init_bias = config.enc_init_bias;
  return EncoderModel::init(pretrained, hyper,
                            stage_seed(config, Stage::encoder_init));
}

MinerConfig miner_config(const ExperimentConfig& config) {
  MinerConfig mc;
  mc.k = config.k;
  mc.batch_size = config.batch_size;
  mc.epochs = config.epochs;
  mc.seed = stage_seed(config, Stage::mining);
  mc.log_rejects = config.log_rejects;
  mc.score_only = config.score_only;
  mc.threads = config.threads;
  return mc;
}

void write_exports(const std::string& dir, const ComparableCorpus& corpus,
                   const RunResult& run) {
  auto surface_line = [&](const Sentence& s) {
    std::string line;
    for (std::size_t i = 0; i < s.surface_words.size(); ++i) {
      if (i) line.push_back(' ');
      line += s.surface_words[i];
    }
    return line;
  };
  auto write_set = [&](const std::string& base,
                       const std::vector<std::pair<SentRef, SentRef>>& pairs) {
    std::ofstream l1(dir + "/" + base + ".l1", std::ios::binary);
    std::ofstream l2(dir + "/" + base + ".l2", std::ios::binary);
    if (!l1 || !l2) throw std::runtime_error("cannot write exports in " + dir);
    for (const auto& [r1, r2] : pairs) {
      l1 << surface_line(corpus.docs_l1[r1.doc].sentences[r1.sent]) << "\n";
      l2 << surface_line(corpus.docs_l2[r2.doc].sentences[r2.sent]) << "\n";
    }
  };
  for (std::size_t e = 0; e < run.epoch_unique.size(); ++e)
    write_set("extracted.epoch" + std::to_string(e + 1), run.epoch_unique[e]);
  write_set("extracted.all", run.all_unique);
}

void write_provenance(const std::string& dir, const ExperimentConfig& config,
                      const std::vector<std::string>& input_files) {
  {
    std::ofstream out(dir + "/resolved.cfg", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + dir + "/resolved.cfg");
    out << config.resolved();
  }
  std::ofstream out(dir + "/provenance.txt", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + dir + "/provenance.txt");
  out << "tool=" << kToolVersion << "\n";
  out << "seed=" << config.seed << "\n";
  for (const auto& path : input_files)
    out << "input=" << path << " fnv64=" << file_checksum(path) << "\n";
}

}  // namespace ssmine
