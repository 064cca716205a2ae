#include "ssmine/synthcorp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ssmine/rng.hpp"

namespace ssmine {

namespace {

// Sattolo's algorithm: a uniformly random cyclic permutation, which by
// construction has no fixed points.
std::vector<int> cyclic_permutation(int n, Rng& rng) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = rng.index(i);  // [0, i)
    std::swap(p[i], p[j]);
  }
  return p;
}

std::string article_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "a%05d", index);
  return buf;
}

}  // namespace

SyntheticCorpus build_synthetic(
    const std::vector<std::pair<std::string, std::string>>& parallel,
    const SynthConfig& config) {
  const int total = static_cast<int>(parallel.size());
  if (config.n_true < 1) throw std::invalid_argument("n_true must be >= 1");
  if (total <= config.n_true)
    throw std::runtime_error("parallel corpus smaller than n_true");
  if (config.ratio < 0.0) throw std::invalid_argument("ratio must be >= 0");
  if (config.article_len < 1)
    throw std::invalid_argument("article_len must be >= 1");

  Rng rng(config.seed);
  std::vector<int> indices(total);
  for (int i = 0; i < total; ++i) indices[i] = i;
  rng.shuffle(indices);

  const std::vector<int> true_idx(indices.begin(),
                                  indices.begin() + config.n_true);
  const std::vector<int> rest(indices.begin() + config.n_true, indices.end());
  const int m = static_cast<int>(rest.size());

  const long long n_false =
      std::llround(config.ratio * static_cast<double>(config.n_true));
  std::vector<std::pair<int, int>> false_base;  // (src idx, tgt idx)
  if (n_false > 0) {
    if (m < 2)
      throw std::runtime_error(
          "remainder of size " + std::to_string(m) + " cannot be deranged");
    if (n_false > static_cast<long long>(config.max_oversample) * m)
      throw std::runtime_error(
          "ratio demands more false pairs than the oversampling cap allows");

    std::vector<int> perm = cyclic_permutation(m, rng);
    // The permutation has no fixed points, but duplicate target lines can
    // still reproduce an original translation; repair those at text level.
    for (int i = 0; i < m; ++i) {
      if (parallel[rest[perm[i]]].second != parallel[rest[i]].second) continue;
      bool fixed = false;
      for (int j = 0; j < m && !fixed; ++j) {
        if (j == i) continue;
        if (parallel[rest[perm[j]]].second != parallel[rest[i]].second &&
            parallel[rest[perm[i]]].second != parallel[rest[j]].second) {
          std::swap(perm[i], perm[j]);
          fixed = true;
        }
      }
      if (!fixed)
        throw std::runtime_error(
            "cannot derange remainder: too many duplicate target lines");
    }
    for (int i = 0; i < m; ++i)
      false_base.emplace_back(rest[i], rest[perm[i]]);
  }

  struct Sample {
    int src, tgt;
    bool is_true;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(config.n_true + n_false));
  for (int idx : true_idx) samples.push_back({idx, idx, true});
  for (long long f = 0; f < n_false; ++f) {
    const auto& base =
        f < static_cast<long long>(false_base.size())
            ? false_base[static_cast<std::size_t>(f)]
            : false_base[rng.below(false_base.size())];
    samples.push_back({base.first, base.second, false});
  }
  rng.shuffle(samples);

  SyntheticCorpus corpus;
  corpus.n_true = config.n_true;
  corpus.n_false = static_cast<int>(n_false);

  const int n_articles =
      (static_cast<int>(samples.size()) + config.article_len - 1) /
      config.article_len;
  for (int a = 0; a < n_articles; ++a) {
    const int lo = a * config.article_len;
    const int hi = std::min<int>(lo + config.article_len,
                                 static_cast<int>(samples.size()));
    const std::string id = article_id(a);
    RawDocument d1{id, {}}, d2{id, {}};

    // The L2 side is shuffled within the article so line positions carry
    // no alignment signal.
    std::vector<int> l2_order(hi - lo);
    for (int i = 0; i < hi - lo; ++i) l2_order[i] = i;
    rng.shuffle(l2_order);
    std::vector<int> l2_line_of(hi - lo);
    for (int pos = 0; pos < hi - lo; ++pos) l2_line_of[l2_order[pos]] = pos;

    for (int i = lo; i < hi; ++i)
      d1.lines.push_back(parallel[samples[i].src].first);
    d2.lines.resize(hi - lo);
    for (int i = lo; i < hi; ++i)
      d2.lines[l2_line_of[i - lo]] = parallel[samples[i].tgt].second;

    for (int i = lo; i < hi; ++i) {
      const PairKey key{{id, i - lo}, {id, l2_line_of[i - lo]}};
      if (samples[i].is_true)
        corpus.truth.insert(key);
      else
        corpus.false_pairs.insert(key);
    }

    corpus.docs_l1.push_back(std::move(d1));
    corpus.docs_l2.push_back(std::move(d2));
    corpus.doc_pairs.emplace_back(id, id);
  }
  return corpus;
}

void write_truth(const std::string& path, const std::set<PairKey>& truth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "doc_id_l1\tline_l1\tdoc_id_l2\tline_l2\n";
  for (const auto& key : truth)
    out << key.l1.doc_id << '\t' << key.l1.line_id << '\t' << key.l2.doc_id
        << '\t' << key.l2.line_id << "\n";
}

std::set<PairKey> read_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::set<PairKey> truth;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty truth file: " + path);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4)
      throw std::runtime_error("malformed truth row: " + line);
    truth.insert(
        PairKey{{cols[0], std::stoi(cols[1])}, {cols[2], std::stoi(cols[3])}});
  }
  return truth;
}

void write_raw_corpus(const std::string& path,
                      const std::vector<RawDocument>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& doc : docs) {
    out << "#DOC " << doc.doc_id << "\n";
    for (const auto& line : doc.lines) out << line << "\n";
  }
}

void write_doc_pairs(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "doc_id_l1\tdoc_id_l2\n";
  for (const auto& [a, b] : pairs) out << a << '\t' << b << "\n";
}

}  // namespace ssmine
