#include "ssmine/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace ssmine {

namespace {

std::vector<std::uint32_t> codepoints(const std::string& s) {
  std::vector<std::uint32_t> cps;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    std::uint32_t cp = c;
    if ((c & 0xE0u) == 0xC0u) {
      len = 2;
      cp = c & 0x1Fu;
    } else if ((c & 0xF0u) == 0xE0u) {
      len = 3;
      cp = c & 0x0Fu;
    } else if ((c & 0xF8u) == 0xF0u) {
      len = 4;
      cp = c & 0x07u;
    }
    if (i + len > s.size()) {
      len = 1;
      cp = c;
    } else {
      for (std::size_t j = 1; j < len; ++j)
        cp = (cp << 6) | (static_cast<unsigned char>(s[i + j]) & 0x3Fu);
    }
    cps.push_back(cp);
    i += len;
  }
  return cps;
}

bool is_vowel_cp(std::uint32_t cp) {
  switch (cp) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      break;
  }
  // Accented Latin vowels (lowercase forms; input is lowercased upstream).
  if (cp >= 0xE0u && cp <= 0xE6u) return true;  // à..æ
  if (cp >= 0xE8u && cp <= 0xEFu) return true;  // è..ï
  if (cp >= 0xF2u && cp <= 0xF6u) return true;  // ò..ö
  if (cp == 0xF8u) return true;                 // ø
  if (cp >= 0xF9u && cp <= 0xFCu) return true;  // ù..ü
  if (cp == 0xFDu || cp == 0xFFu) return true;  // ý, ÿ
  if (cp == 0x153u) return true;                // œ
  return false;
}

bool is_letter_or_digit_cp(std::uint32_t cp) {
  if (cp < 0x80u)
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  return true;  // non-ASCII treated as letters, as in tokenize()
}

bool counts_as_word(const std::string& token) {
  for (std::uint32_t cp : codepoints(token))
    if (is_letter_or_digit_cp(cp)) return true;
  return false;
}

const char kSep = '\x1f';

std::string join_key(std::span<const std::string> words) {
  std::string key;
  for (const auto& w : words) {
    key += w;
    key.push_back(kSep);
  }
  return key;
}

}  // namespace

int syllables(const std::string& word) {
  if (word.empty()) throw std::invalid_argument("empty word");
  int groups = 0;
  bool in_group = false;
  for (std::uint32_t cp : codepoints(word)) {
    const bool vowel = is_vowel_cp(cp);
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }
  return std::max(groups, 1);
}

double gunning_fog(const std::vector<std::vector<std::string>>& sentences) {
  if (sentences.empty()) throw std::invalid_argument("no sentences");
  long long words = 0, complex_words = 0;
  for (const auto& sent : sentences) {
    for (const auto& token : sent) {
      if (!counts_as_word(token)) continue;
      ++words;
      if (syllables(token) > 2) ++complex_words;
    }
  }
  if (words == 0) throw std::runtime_error("text has no words");
  const double w = static_cast<double>(words);
  const double s = static_cast<double>(sentences.size());
  const double c = static_cast<double>(complex_words);
  return 0.4 * (w / s + 100.0 * c / w);
}

double homograph_fraction(
    std::span<const std::string> tokens,
    const std::unordered_set<std::string>& shared_types) {
  if (tokens.empty()) return 0.0;
  long long shared = 0;
  for (const auto& t : tokens) shared += shared_types.count(t);
  return static_cast<double>(shared) / tokens.size();
}

double homograph_ratio(const Sentence& l1, const Sentence& l2,
                       const std::unordered_set<std::string>& shared_types) {
  std::vector<std::string> pooled;
  pooled.insert(pooled.end(), l1.tokens.begin() + 1, l1.tokens.end());
  pooled.insert(pooled.end(), l2.tokens.begin() + 1, l2.tokens.end());
  return homograph_fraction(pooled, shared_types);
}

std::unordered_set<std::string> shared_token_types(
    const ComparableCorpus& corpus) {
  std::unordered_set<std::string> l1_types;
  for (const auto& doc : corpus.docs_l1)
    for (const auto& sent : doc.sentences)
      l1_types.insert(sent.tokens.begin() + 1, sent.tokens.end());
  std::unordered_set<std::string> shared;
  for (const auto& doc : corpus.docs_l2)
    for (const auto& sent : doc.sentences)
      for (std::size_t t = 1; t < sent.tokens.size(); ++t)
        if (l1_types.count(sent.tokens[t])) shared.insert(sent.tokens[t]);
  return shared;
}

NGramLM NGramLM::train(const std::vector<std::vector<std::string>>& sentences,
                       int order, double discount) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (sentences.empty()) throw std::runtime_error("empty corpus");
  NGramLM lm;
  lm.order_ = order;
  lm.discount_ = discount;
  lm.levels_.resize(order);

  std::vector<std::string> seq;
  for (const auto& sent : sentences) {
    seq.assign(order - 1, kBos);
    seq.insert(seq.end(), sent.begin(), sent.end());
    seq.push_back(kEos);
    for (std::size_t i = static_cast<std::size_t>(order - 1); i < seq.size();
         ++i) {
      lm.vocab_.insert(seq[i]);
      for (int k = 1; k <= order; ++k) {
        std::span<const std::string> ctx(seq.data() + i - (k - 1),
                                         static_cast<std::size_t>(k - 1));
        auto& stats = lm.levels_[k - 1][join_key(ctx)];
        ++stats.total;
        ++stats.counts[seq[i]];
      }
    }
  }
  return lm;
}

double NGramLM::prob(std::span<const std::string> context,
                     const std::string& word) const {
  const std::string w = vocab_.count(word) ? word : std::string("<unk>");
  // Uniform base over vocabulary plus the unknown type.
  double p = 1.0 / (static_cast<double>(vocab_.size()) + 1.0);
  std::vector<std::string> padded;
  if (context.size() < static_cast<std::size_t>(order_ - 1)) {
    padded.assign(order_ - 1 - context.size(), kBos);
    padded.insert(padded.end(), context.begin(), context.end());
    context = padded;
  }
  for (int k = 1; k <= order_; ++k) {
    std::span<const std::string> ctx =
        context.subspan(context.size() - (k - 1), k - 1);
    const auto level_it = levels_[k - 1].find(join_key(ctx));
    if (level_it == levels_[k - 1].end()) continue;  // unseen: keep backoff
    const ContextStats& stats = level_it->second;
    const auto count_it = stats.counts.find(w);
    const double c =
        count_it == stats.counts.end() ? 0.0 : static_cast<double>(count_it->second);
    const double total = static_cast<double>(stats.total);
    const double distinct = static_cast<double>(stats.counts.size());
    p = std::max(c - discount_, 0.0) / total +
        discount_ * distinct / total * p;
  }
  return p;
}

double perplexity(const NGramLM& lm,
                  const std::vector<std::vector<std::string>>& sentences) {
  long long tokens = 0;
  double ll = 0.0;
  for (const auto& sent : sentences) {
    std::vector<std::string> seq = sent;
    seq.push_back(NGramLM::kEos);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::size_t lo =
          i > static_cast<std::size_t>(lm.order() - 1)
              ? i - static_cast<std::size_t>(lm.order() - 1)
              : 0;
      std::span<const std::string> ctx(seq.data() + lo, i - lo);
      ll += std::log(lm.prob(ctx, seq[i]));
      ++tokens;
    }
  }
  if (tokens == 0) throw std::runtime_error("empty evaluation set");
  return std::exp(-ll / static_cast<double>(tokens));
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("length mismatch");
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::runtime_error("undefined correlation: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

struct SentIndex {
  std::unordered_map<std::string, const Sentence*> l1, l2;

  static std::string key_of(const SentKey& k) {
    return k.doc_id + '\x1f' + std::to_string(k.line_id);
  }

  explicit SentIndex(const ComparableCorpus& corpus) {
    for (const auto& doc : corpus.docs_l1)
      for (const auto& s : doc.sentences)
        l1[key_of({s.doc_id, s.line_id})] = &s;
    for (const auto& doc : corpus.docs_l2)
      for (const auto& s : doc.sentences)
        l2[key_of({s.doc_id, s.line_id})] = &s;
  }

  const Sentence* find(const SentKey& k, bool l1_side) const {
    const auto& m = l1_side ? l1 : l2;
    const auto it = m.find(key_of(k));
    return it == m.end() ? nullptr : it->second;
  }
};

void push_correlation(std::vector<CorrelationRow>& rows, int epoch,
                      const std::string& v1, const std::string& v2,
                      const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  if (xs.size() < 2) return;
  try {
    rows.push_back({epoch, v1, v2, pearson(xs, ys),
                    static_cast<std::int64_t>(xs.size())});
  } catch (const std::runtime_error&) {
    // degenerate (zero variance) windows are skipped, not faked
  }
}

}  // namespace

CurriculumReport window_metrics(
    const std::vector<LogRecord>& log, const ComparableCorpus& corpus,
    const NGramLM& lm_l1, const NGramLM& lm_l2,
    const std::unordered_set<std::string>& shared_types, int window) {
  if (log.empty()) throw std::runtime_error("empty mining log");
  if (window < 1) throw std::invalid_argument("window must be >= 1");

  const SentIndex index(corpus);
  CurriculumReport report;
  int last_epoch = 0;

  for (const auto& rec : log) {
    if (!rec.acc_dual) continue;
    const Sentence* s1 = index.find(rec.key.l1, true);
    const Sentence* s2 = index.find(rec.key.l2, false);
    if (s1 == nullptr || s2 == nullptr)
      throw std::runtime_error("log references a sentence missing from the corpus");

    PairMetrics pm;
    pm.epoch = rec.epoch;
    pm.step = rec.step;
    pm.score_w = rec.score_w;
    pm.score_h = rec.score_h;
    // The intersection rule binds on the weaker channel, so the pair's
    // similarity is the smaller of the two margins.
    pm.similarity = std::min(rec.score_w, rec.score_h);
    pm.homograph = homograph_ratio(*s1, *s2, shared_types);
    pm.homograph_l1 = homograph_fraction(
        std::span<const std::string>(s1->tokens).subspan(1), shared_types);
    pm.gf_l1 = gunning_fog({s1->surface_words});
    pm.ppl_l1 = perplexity(lm_l1, {s1->surface_words});
    pm.ppl_l2 = perplexity(lm_l2, {s2->surface_words});
    report.pairs.push_back(pm);
    last_epoch = std::max(last_epoch, rec.epoch);
  }
  if (report.pairs.empty())
    throw std::runtime_error("mining log has no accepted pairs");

  // Windowed means over the acceptance stream.
  std::map<std::int64_t, std::vector<const PairMetrics*>> windows;
  std::map<std::int64_t, std::vector<const Sentence*>> window_texts;
  for (const auto& pm : report.pairs)
    windows[(pm.step - 1) / window].push_back(&pm);
  for (const auto& rec : log) {
    if (!rec.acc_dual) continue;
    window_texts[(rec.step - 1) / window].push_back(
        index.find(rec.key.l1, true));
  }

  for (const auto& [w_idx, pms] : windows) {
    const std::int64_t start = w_idx * window + 1;
    const std::int64_t n = static_cast<std::int64_t>(pms.size());
    auto mean_of = [&](auto getter) {
      double sum = 0.0;
      for (const auto* pm : pms) sum += getter(*pm);
      return sum / static_cast<double>(n);
    };
    auto push = [&](const char* name, double value) {
      report.series.push_back({start, name, value, n});
    };
    push("similarity", mean_of([](const PairMetrics& p) { return p.similarity; }));
    push("score_w", mean_of([](const PairMetrics& p) { return p.score_w; }));
    push("score_h", mean_of([](const PairMetrics& p) { return p.score_h; }));
    push("homograph", mean_of([](const PairMetrics& p) { return p.homograph; }));
    push("homograph_l1",
         mean_of([](const PairMetrics& p) { return p.homograph_l1; }));
    push("gf_sent_mean_l1", mean_of([](const PairMetrics& p) { return p.gf_l1; }));
    push("ppl_l1", mean_of([](const PairMetrics& p) { return p.ppl_l1; }));
    push("ppl_l2", mean_of([](const PairMetrics& p) { return p.ppl_l2; }));
    // Text-level GF of the window's pooled English-side sentences; this is
    // not the mean of the per-sentence scores.
    std::vector<std::vector<std::string>> pooled;
    for (const auto* s : window_texts[w_idx]) pooled.push_back(s->surface_words);
    push("gf_text_l1", gunning_fog(pooled));
  }

  // Correlations over the first and last epochs, capped at 10k pairs each.
  std::vector<int> corr_epochs = {1};
  if (last_epoch > 1) corr_epochs.push_back(last_epoch);
  for (int epoch : corr_epochs) {
    std::vector<double> sim, hom, gf;
    for (const auto& pm : report.pairs) {
      if (pm.epoch != epoch) continue;
      if (sim.size() >= 10000) break;
      sim.push_back(pm.similarity);
      hom.push_back(pm.homograph);
      gf.push_back(pm.gf_l1);
    }
    push_correlation(report.correlations, epoch, "homograph", "similarity",
                     hom, sim);
    push_correlation(report.correlations, epoch, "gf", "homograph", gf, hom);
    push_correlation(report.correlations, epoch, "gf", "similarity", gf, sim);
  }

  // Per-sentence GF histograms for the first, middle and last epoch.
  const int mid_epoch = (1 + last_epoch) / 2;
  auto hist_for = [&](const char* phase, int epoch) {
    std::set<PairKey> seen;
    std::map<int, std::int64_t> bins;
    for (const auto& rec : log) {
      if (!rec.acc_dual || rec.epoch != epoch) continue;
      if (!seen.insert(rec.key).second) continue;
      const Sentence* s1 = index.find(rec.key.l1, true);
      bins[static_cast<int>(std::floor(gunning_fog({s1->surface_words})))]++;
    }
    for (const auto& [bin, count] : bins)
      report.gf_hist.push_back({phase, bin, count});
  };
  hist_for("first", 1);
  if (mid_epoch > 1 && mid_epoch < last_epoch) hist_for("middle", mid_epoch);
  if (last_epoch > 1) hist_for("last", last_epoch);

  return report;
}

void write_curriculum_csv(const std::string& path,
                          const MetricSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "window_start_step,metric,mean,count\n";
  char buf[48];
  for (const auto& p : series) {
    std::snprintf(buf, sizeof buf, "%.10g", p.mean);
    out << p.window_start_step << ',' << p.metric << ',' << buf << ','
        << p.count << "\n";
  }
}

void write_correlations_csv(const std::string& path,
                            const std::vector<CorrelationRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,var1,var2,r,n\n";
  char buf[48];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.10g", row.r);
    out << row.epoch << ',' << row.var1 << ',' << row.var2 << ',' << buf
        << ',' << row.n << "\n";
  }
}

void write_gf_hist_csv(const std::string& path,
                       const std::vector<GfHistRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "phase,bin_lo,count\n";
  for (const auto& row : rows)
    out << row.phase << ',' << row.bin_lo << ',' << row.count << "\n";
}

}  // namespace ssmine
