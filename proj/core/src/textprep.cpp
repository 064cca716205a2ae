#include "ssmine/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ssmine {

namespace {

// Splits UTF-8 into codepoint-sized substrings. Invalid bytes pass through
// as single-byte units.
std::vector<std::string> utf8_units(const std::string& s) {
  std::vector<std::string> units;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((c & 0x80u) == 0x00u)
      len = 1;
    else if ((c & 0xE0u) == 0xC0u)
      len = 2;
    else if ((c & 0xF0u) == 0xE0u)
      len = 3;
    else if ((c & 0xF8u) == 0xF0u)
      len = 4;
    if (i + len > s.size()) len = 1;
    units.emplace_back(s, i, len);
    i += len;
  }
  return units;
}

std::uint32_t codepoint_of(const std::string& unit) {
  const unsigned char c0 = static_cast<unsigned char>(unit[0]);
  if (unit.size() == 1) return c0;
  std::uint32_t cp = 0;
  if (unit.size() == 2)
    cp = c0 & 0x1Fu;
  else if (unit.size() == 3)
    cp = c0 & 0x0Fu;
  else
    cp = c0 & 0x07u;
  for (std::size_t i = 1; i < unit.size(); ++i)
    cp = (cp << 6) | (static_cast<unsigned char>(unit[i]) & 0x3Fu);
  return cp;
}

std::string encode_utf8(std::uint32_t cp) {
  std::string out;
  if (cp < 0x80u) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800u) {
    out.push_back(static_cast<char>(0xC0u | (cp >> 6)));
    out.push_back(static_cast<char>(0x80u | (cp & 0x3Fu)));
  } else {
    out.push_back(static_cast<char>(0xE0u | (cp >> 12)));
    out.push_back(static_cast<char>(0x80u | ((cp >> 6) & 0x3Fu)));
    out.push_back(static_cast<char>(0x80u | (cp & 0x3Fu)));
  }
  return out;
}

// ASCII plus Latin-1 letter lowercasing; NFC input assumed.
std::string lowercase_unit(const std::string& unit) {
  const std::uint32_t cp = codepoint_of(unit);
  if (cp >= 'A' && cp <= 'Z') return std::string(1, static_cast<char>(cp + 0x20));
  if (cp >= 0xC0u && cp <= 0xDEu && cp != 0xD7u) return encode_utf8(cp + 0x20u);
  return unit;
}

bool is_space_cp(std::uint32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\r' || cp == '\n' || cp == 0xA0u;
}

// Letters and digits continue a word; anything else is punctuation. Non-ASCII
// codepoints are treated as letters (covers accented Latin text).
bool is_word_cp(std::uint32_t cp) {
  if (cp < 0x80u)
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  return !is_space_cp(cp);
}

const char kSep = '\x1f';

std::string pair_key(const std::string& a, const std::string& b) {
  std::string k = a;
  k.push_back(kSep);
  k += b;
  return k;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  for (const auto& unit : utf8_units(text)) {
    const std::uint32_t cp = codepoint_of(unit);
    if (is_space_cp(cp)) {
      if (!current.empty()) {
        words.push_back(current);
        current.clear();
      }
    } else if (is_word_cp(cp)) {
      current += lowercase_unit(unit);
    } else {
      if (!current.empty()) {
        words.push_back(current);
        current.clear();
      }
      words.push_back(unit);  // one token per punctuation codepoint
    }
  }
  if (!current.empty()) words.push_back(current);
  return words;
}

BpeModel BpeModel::learn(const std::vector<std::vector<std::string>>& corpora,
                         int n_merges) {
  if (n_merges < 0) throw std::invalid_argument("n_merges must be >= 0");
  std::map<std::string, long long> word_freq;
  for (const auto& words : corpora)
    for (const auto& w : words) ++word_freq[w];
  if (word_freq.empty()) throw std::runtime_error("empty corpus");

  // Each distinct word as a symbol sequence, weighted by its frequency.
  std::vector<std::vector<std::string>> seqs;
  std::vector<long long> freqs;
  seqs.reserve(word_freq.size());
  for (const auto& [word, freq] : word_freq) {
    seqs.push_back(utf8_units(word));
    freqs.push_back(freq);
  }

  BpeModel model;
  for (int m = 0; m < n_merges; ++m) {
    std::map<std::pair<std::string, std::string>, long long> pair_freq;
    for (std::size_t w = 0; w < seqs.size(); ++w) {
      const auto& seq = seqs[w];
      for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        pair_freq[{seq[i], seq[i + 1]}] += freqs[w];
    }
    // Highest frequency wins; ties go to the lexicographically smallest
    // pair, which the ordered map yields first.
    std::pair<std::string, std::string> best;
    long long best_freq = 0;
    for (const auto& [pair, freq] : pair_freq) {
      if (freq > best_freq) {
        best = pair;
        best_freq = freq;
      }
    }
    if (best_freq < 2) break;  // nothing repeats, further merges are noise

    const std::string merged = best.first + best.second;
    for (auto& seq : seqs) {
      std::vector<std::string> out;
      out.reserve(seq.size());
      std::size_t i = 0;
      while (i < seq.size()) {
        if (i + 1 < seq.size() && seq[i] == best.first &&
            seq[i + 1] == best.second) {
          out.push_back(merged);
          i += 2;
        } else {
          out.push_back(seq[i]);
          ++i;
        }
      }
      seq = std::move(out);
    }
    model.merge_rank_[pair_key(best.first, best.second)] =
        static_cast<int>(model.merges_.size());
    model.merges_.push_back(best);
  }

  model.build_vocab(corpora);
  return model;
}

void BpeModel::build_vocab(
    const std::vector<std::vector<std::string>>& corpora) {
  // Vocabulary: every producible subword in plain and word-final form.
  std::set<std::string> symbols;
  for (const auto& words : corpora)
    for (const auto& w : words)
      for (const auto& u : utf8_units(w)) symbols.insert(u);
  for (const auto& [a, b] : merges_) symbols.insert(a + b);

  vocab_.clear();
  vocab_[kUnk] = 0;
  int id = 1;
  for (const auto& s : symbols) vocab_[s] = id++;
  for (const auto& s : symbols) vocab_[s + kEndOfWord] = id++;
  for (const auto& sp : specials_) vocab_[sp] = id++;
  cache_.clear();
}

int BpeModel::add_special(const std::string& token) {
  auto it = vocab_.find(token);
  if (it != vocab_.end()) return it->second;
  const int id = vocab_size();
  vocab_[token] = id;
  specials_.push_back(token);
  return id;
}

int BpeModel::token_id(const std::string& token) const {
  auto it = vocab_.find(token);
  return it == vocab_.end() ? 0 : it->second;
}

std::vector<std::string> BpeModel::apply(const std::string& word) const {
  if (auto it = cache_.find(word); it != cache_.end()) return it->second;

  std::vector<std::string> seq = utf8_units(word);
  // Repeatedly apply the earliest-learned merge present; equivalent to
  // replaying the merge list in order.
  while (seq.size() > 1) {
    int best_rank = -1;
    std::size_t best_pos = 0;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      auto it = merge_rank_.find(pair_key(seq[i], seq[i + 1]));
      if (it != merge_rank_.end() &&
          (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank < 0) break;
    seq[best_pos] += seq[best_pos + 1];
    seq.erase(seq.begin() + static_cast<long>(best_pos) + 1);
  }
  if (!seq.empty()) seq.back() += kEndOfWord;
  cache_.emplace(word, seq);
  return seq;
}

std::vector<std::string> BpeModel::apply_words(
    const std::vector<std::string>& words) const {
  std::vector<std::string> out;
  for (const auto& w : words) {
    auto toks = apply(w);
    out.insert(out.end(), toks.begin(), toks.end());
  }
  return out;
}

std::vector<std::string> BpeModel::detokenize(
    const std::vector<std::string>& tokens) {
  std::vector<std::string> words;
  std::string current;
  const std::string marker = kEndOfWord;
  for (const auto& tok : tokens) {
    if (tok.size() >= marker.size() &&
        tok.compare(tok.size() - marker.size(), marker.size(), marker) == 0) {
      current += tok.substr(0, tok.size() - marker.size());
      words.push_back(current);
      current.clear();
    } else {
      current += tok;
    }
  }
  if (!current.empty()) words.push_back(current);  // tolerate missing marker
  return words;
}

void BpeModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << merges_.size() << "\n";
  for (const auto& [a, b] : merges_) out << a << ' ' << b << "\n";
}

BpeModel BpeModel::load(const std::string& path,
                        const std::vector<std::vector<std::string>>& corpora) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::size_t n = 0;
  if (!(in >> n)) throw std::runtime_error("bad bpe model header: " + path);
  BpeModel model;
  for (std::size_t i = 0; i < n; ++i) {
    std::string a, b;
    if (!(in >> a >> b))
      throw std::runtime_error("truncated bpe model: " + path);
    model.merge_rank_[pair_key(a, b)] = static_cast<int>(i);
    model.merges_.emplace_back(a, b);
  }
  model.build_vocab(corpora);
  return model;
}

std::vector<RawDocument> read_raw_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<RawDocument> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("#DOC ", 0) == 0) {
      docs.push_back({line.substr(5), {}});
    } else if (!docs.empty()) {
      docs.back().lines.push_back(line);
    } else if (!line.empty()) {
      // Content before any #DOC marker forms an implicit document.
      docs.push_back({"doc0", {line}});
    }
  }
  return docs;
}

std::vector<std::pair<std::string, std::string>> read_doc_pairs(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && line == "doc_id_l1\tdoc_id_l2") {
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("pairs file line without tab: " + line);
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return pairs;
}

std::string lang_tag(const std::string& lang) { return "<2" + lang + ">"; }

namespace {

Document process_document(const RawDocument& raw, const std::string& lang,
                          BpeModel& bpe, int min_len, int max_len,
                          int* dropped_sentences) {
  Document doc;
  doc.doc_id = raw.doc_id;
  doc.lang = lang;
  const std::string tag = lang_tag(lang);
  const int tag_id = bpe.add_special(tag);
  int line_id = 0;
  for (const auto& line : raw.lines) {
    auto words = tokenize(line);
    if (words.empty()) {
      ++line_id;
      continue;
    }
    auto tokens = bpe.apply_words(words);
    const int n = static_cast<int>(tokens.size());
    if (n < min_len || n > max_len) {
      ++*dropped_sentences;
      ++line_id;
      continue;
    }
    Sentence sent;
    sent.lang = lang;
    sent.doc_id = raw.doc_id;
    sent.line_id = line_id;
    sent.surface_words = std::move(words);
    sent.tokens.reserve(tokens.size() + 1);
    sent.tokens.push_back(tag);
    sent.token_ids.push_back(tag_id);
    for (auto& t : tokens) {
      sent.token_ids.push_back(bpe.token_id(t));
      sent.tokens.push_back(std::move(t));
    }
    doc.sentences.push_back(std::move(sent));
    ++line_id;
  }
  return doc;
}

}  // namespace

ComparableCorpus build_corpus(
    const std::vector<RawDocument>& raw_l1, const std::string& lang_l1,
    const std::vector<RawDocument>& raw_l2, const std::string& lang_l2,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    BpeModel& bpe, int min_len, int max_len) {
  ComparableCorpus corpus;
  corpus.lang_l1 = lang_l1;
  corpus.lang_l2 = lang_l2;

  std::unordered_map<std::string, const RawDocument*> by_id_l1, by_id_l2;
  for (const auto& d : raw_l1) by_id_l1[d.doc_id] = &d;
  for (const auto& d : raw_l2) by_id_l2[d.doc_id] = &d;

  for (const auto& [id1, id2] : pairs) {
    auto it1 = by_id_l1.find(id1);
    auto it2 = by_id_l2.find(id2);
    if (it1 == by_id_l1.end() || it2 == by_id_l2.end())
      throw std::runtime_error("doc pair references unknown document: " + id1 +
                               " / " + id2);
    Document d1 = process_document(*it1->second, lang_l1, bpe, min_len,
                                   max_len, &corpus.dropped_sentences);
    Document d2 = process_document(*it2->second, lang_l2, bpe, min_len,
                                   max_len, &corpus.dropped_sentences);
    if (d1.sentences.empty() || d2.sentences.empty()) {
      ++corpus.dropped_docs;
      continue;
    }
    corpus.docs_l1.push_back(std::move(d1));
    corpus.docs_l2.push_back(std::move(d2));
    corpus.doc_pairs.emplace_back(static_cast<int>(corpus.docs_l1.size()) - 1,
                                  static_cast<int>(corpus.docs_l2.size()) - 1);
  }
  return corpus;
}

const Sentence* ComparableCorpus::find(const SentKey& key,
                                       bool l1_side) const {
  const auto& docs = l1_side ? docs_l1 : docs_l2;
  for (const auto& doc : docs) {
    if (doc.doc_id != key.doc_id) continue;
    for (const auto& s : doc.sentences)
      if (s.line_id == key.line_id) return &s;
  }
  return nullptr;
}

}  // namespace ssmine
