#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ssmine {

// Position of a sentence inside a corpus: (document id, line index).
struct SentKey {
  std::string doc_id;
  int line_id = 0;
  auto operator<=>(const SentKey&) const = default;
};

// Identity of a candidate/extracted pair.
struct PairKey {
  SentKey l1;
  SentKey l2;
  auto operator<=>(const PairKey&) const = default;
};

struct Sentence {
  std::string lang;
  std::vector<std::string> tokens;         // post-BPE, tokens[0] is the <2xx> tag
  std::vector<int> token_ids;              // same length as tokens
  std::vector<std::string> surface_words;  // pre-BPE words, for readability metrics
  std::string doc_id;
  int line_id = 0;

  // Number of content tokens; the language tag is control metadata and is
  // excluded from length filters and every metric.
  int content_size() const { return static_cast<int>(tokens.size()) - 1; }
};

struct Document {
  std::string doc_id;
  std::string lang;
  std::vector<Sentence> sentences;
};

struct ComparableCorpus {
  std::string lang_l1, lang_l2;
  std::vector<Document> docs_l1, docs_l2;
  std::vector<std::pair<int, int>> doc_pairs;  // indices into docs_l1 / docs_l2
  std::set<PairKey> truth;                     // ground-truth pairs, empty if unknown
  int dropped_docs = 0;                        // documents lost to the length filter
  int dropped_sentences = 0;

  const Sentence* find(const SentKey& key, bool l1_side) const;
};

// Lowercases and splits a raw line into words. Runs of letters/digits form
// words; every other non-space codepoint becomes its own token.
std::vector<std::string> tokenize(const std::string& text);

// One learned merge: pair of symbols replaced by their concatenation.
using Merge = std::pair<std::string, std::string>;

class BpeModel {
 public:
  // Greedy highest-frequency pair merging over the concatenated word
  // sequences of both languages. Ties broken by lexicographic order of the
  // pair. Stops early once no pair occurs twice. Throws on empty corpus.
  static BpeModel learn(const std::vector<std::vector<std::string>>& corpora,
                        int n_merges);

  // Reads merges from the text format (`save`) and rebuilds the vocabulary
  // from the given corpora, which must cover the characters it will be
  // applied to.
  static BpeModel load(const std::string& path,
                       const std::vector<std::vector<std::string>>& corpora);

  // Segment one word. Merges are applied in learned order; the word-final
  // subword carries the `</w>` marker so segmentation is reversible.
  std::vector<std::string> apply(const std::string& word) const;

  // Segment a word sequence (concatenation of apply() per word).
  std::vector<std::string> apply_words(
      const std::vector<std::string>& words) const;

  // Inverse of apply_words: joins subwords and splits at `</w>` markers.
  static std::vector<std::string> detokenize(
      const std::vector<std::string>& tokens);

  // Registers a special token (language tag); id appended after the regular
  // vocabulary, insertion order preserved.
  int add_special(const std::string& token);

  // Token id; unknown strings map to the reserved <unk> id (0).
  int token_id(const std::string& token) const;
  bool has_token(const std::string& token) const { return vocab_.count(token) > 0; }

  const std::vector<Merge>& merges() const { return merges_; }
  const std::unordered_map<std::string, int>& vocab() const { return vocab_; }
  int vocab_size() const { return static_cast<int>(vocab_.size()); }

  // Text format: one header line with the merge count, then one merge per
  // line (two symbols separated by a space).
  void save(const std::string& path) const;

  static constexpr const char* kEndOfWord = "</w>";
  static constexpr const char* kUnk = "<unk>";

 private:
  void build_vocab(const std::vector<std::vector<std::string>>& corpora);

  std::vector<Merge> merges_;
  std::unordered_map<std::string, int> merge_rank_;  // "a\x1fb" -> rank
  std::unordered_map<std::string, int> vocab_;
  std::vector<std::string> specials_;
  mutable std::unordered_map<std::string, std::vector<std::string>> cache_;
};

// Raw input: documents of untokenized lines, as read from the corpus format.
struct RawDocument {
  std::string doc_id;
  std::vector<std::string> lines;
};

// Parses the corpus text format: one sentence per line, `#DOC <id>` starts a
// new document.
std::vector<RawDocument> read_raw_corpus(const std::string& path);

// Parses pairs.tsv (doc_id_L1 <tab> doc_id_L2).
std::vector<std::pair<std::string, std::string>> read_doc_pairs(
    const std::string& path);

// Tokenizes, BPE-segments, tags and length-filters both sides of a paired
// raw corpus. Sentences outside [min_len, max_len] content tokens are
// dropped; documents left empty are dropped (with their pair) and counted.
ComparableCorpus build_corpus(
    const std::vector<RawDocument>& raw_l1, const std::string& lang_l1,
    const std::vector<RawDocument>& raw_l2, const std::string& lang_l2,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    BpeModel& bpe, int min_len = 6, int max_len = 50);

// The <2xx> control tag for a language id.
std::string lang_tag(const std::string& lang);

}  // namespace ssmine
