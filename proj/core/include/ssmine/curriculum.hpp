#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ssmine/miner.hpp"
#include "ssmine/textprep.hpp"

namespace ssmine {

// Maximal vowel-letter groups (aeiouy plus accented Latin vowels), never
// less than one. Language-agnostic by design. Throws on an empty word.
int syllables(const std::string& word);

// Gunning Fog index of a text: 0.4 * (words/sentences + 100*complex/words),
// a complex word having more than two syllables. Tokens without a letter or
// digit do not count as words. Throws when no words remain.
double gunning_fog(const std::vector<std::vector<std::string>>& sentences);

// Fraction of the given tokens that occur in both languages' corpora.
double homograph_fraction(std::span<const std::string> tokens,
                          const std::unordered_set<std::string>& shared_types);

// Pooled content tokens of both sides (language tags excluded).
double homograph_ratio(const Sentence& l1, const Sentence& l2,
                       const std::unordered_set<std::string>& shared_types);

// Content token types occurring on both sides of the corpus.
std::unordered_set<std::string> shared_token_types(
    const ComparableCorpus& corpus);

// Interpolated absolute-discounting n-gram model over surface words.
// Sentence ends are modelled with an explicit </s> event; unknown words map
// to a reserved type that only ever receives backoff mass.
class NGramLM {
 public:
  static NGramLM train(const std::vector<std::vector<std::string>>& sentences,
                       int order = 3, double discount = 0.75);

  // P(word | context), context being the preceding words of the sentence.
  double prob(std::span<const std::string> context,
              const std::string& word) const;

  int order() const { return order_; }
  // Distinct trained types including </s>, excluding the unknown type.
  int vocab_size() const { return static_cast<int>(vocab_.size()); }

  static constexpr const char* kEos = "</s>";
  static constexpr const char* kBos = "<s>";

 private:
  struct ContextStats {
    long long total = 0;
    std::unordered_map<std::string, long long> counts;
  };

  int order_ = 3;
  double discount_ = 0.75;
  std::unordered_set<std::string> vocab_;
  std::vector<std::unordered_map<std::string, ContextStats>> levels_;
};

// exp of the mean negative log-likelihood per token, end-of-sentence events
// included. Throws on empty input.
double perplexity(const NGramLM& lm,
                  const std::vector<std::vector<std::string>>& sentences);

// Sample Pearson correlation; throws on length mismatch, fewer than two
// points, or zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct MetricPoint {
  std::int64_t window_start_step = 0;
  std::string metric;
  double mean = 0.0;
  std::int64_t count = 0;
};
using MetricSeries = std::vector<MetricPoint>;

struct PairMetrics {
  int epoch = 0;
  std::int64_t step = 0;
  double similarity = 0.0;  // min of the two channel scores
  double score_w = 0.0, score_h = 0.0;
  double homograph = 0.0, homograph_l1 = 0.0;
  double gf_l1 = 0.0;
  double ppl_l1 = 0.0, ppl_l2 = 0.0;
};

struct CorrelationRow {
  int epoch = 0;
  std::string var1, var2;
  double r = 0.0;
  std::int64_t n = 0;
};

struct GfHistRow {
  std::string phase;  // "first", "middle", "last"
  int bin_lo = 0;
  std::int64_t count = 0;
};

struct CurriculumReport {
  MetricSeries series;
  std::vector<PairMetrics> pairs;  // one row per dual acceptance
  std::vector<CorrelationRow> correlations;
  std::vector<GfHistRow> gf_hist;
};

// Windowed aggregates over the dual-accepted stream: mean similarity and
// channel scores, homograph ratios, per-language perplexity, plus the
// window's pooled-text Gunning Fog next to the mean of per-sentence scores
// (the two differ and both are reported). Also emits per-pair rows capped
// at 10k per epoch for the first/last-epoch correlation analysis and the
// per-phase GF histograms (unit-width bins).
CurriculumReport window_metrics(
    const std::vector<LogRecord>& log, const ComparableCorpus& corpus,
    const NGramLM& lm_l1, const NGramLM& lm_l2,
    const std::unordered_set<std::string>& shared_types, int window = 1000);

void write_curriculum_csv(const std::string& path, const MetricSeries& series);
void write_correlations_csv(const std::string& path,
                            const std::vector<CorrelationRow>& rows);
void write_gf_hist_csv(const std::string& path,
                       const std::vector<GfHistRow>& rows);

}  // namespace ssmine
