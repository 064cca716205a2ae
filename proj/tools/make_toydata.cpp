// Generates the bundled bilingual toy corpus (data/toy.qaa, data/toy.qab):
// parallel sentences in two constructed related languages that share a
// script. The two sides share proper names, numbers and a set of identical
// cognates (the homograph anchors), while the rest of the lexicon is
// related but spelled differently. Sentence complexity is mixed by design:
// short name/number-heavy lines, mid-length clauses, and long sentences
// built from recurring polysyllabic collocations.
//
// The corpus is committed to the repository; rerun this tool only to
// regenerate it (output is deterministic for a given seed).

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ssmine/rng.hpp"

using ssmine::Rng;

namespace {

struct Word {
  std::string l1, l2;
};

struct Chunk {
  std::vector<std::string> l1, l2;
};

Chunk operator+(Chunk a, const Chunk& b) {
  a.l1.insert(a.l1.end(), b.l1.begin(), b.l1.end());
  a.l2.insert(a.l2.end(), b.l2.begin(), b.l2.end());
  return a;
}

Chunk shared(const std::string& w) { return {{w}, {w}}; }
Chunk word(const Word& w) { return {{w.l1}, {w.l2}}; }

// Function words; parallel but never identical across the two languages.
const Word kDet{"se", "si"};
const Word kDet2{"na", "ne"};
const Word kOf{"po", "pu"};
const Word kAnd{"ke", "ko"};
const Word kIn{"ur", "ar"};
const Word kWith{"den", "dun"};
const Word kBut{"mi", "me"};
const Word kTo{"ta", "to"};
const Word kFor{"vo", "vi"};
const Word kUnder{"lun", "lon"};
const Word kIf{"em", "im"};
const Word kWhen{"gri", "gra"};

const std::vector<std::string> kNames = {
    "mira",  "toma",  "karel", "senna",  "velda", "orin",
    "basku", "lira",  "dorn",  "vela",   "marit", "solen",
    "tibor", "anka",  "rulf",  "edda",   "vanko", "petra",
    "jorin", "malda", "rurik", "tessa",  "ivo",   "brenna"};

const std::vector<std::string> kCognates = {
    "metro",   "park",    "radio",  "atlas",  "granit", "salon",
    "tunel",   "lampa",   "motor",  "kanal",  "banko",  "forte",
    "opera",   "piano",   "tempo",  "vulkan", "sirkus", "teatro",
    "museo",   "fabrik",  "kristal", "planeta", "komet", "signal",
    "magnet",  "turbin",  "balkon", "terasa", "kupola", "statua"};

const std::vector<std::string> kOnsets = {"b", "d",  "f",  "g",  "k",  "l",
                                          "m", "n",  "p",  "r",  "s",  "t",
                                          "v", "z",  "br", "dr", "gr", "kl",
                                          "pl", "st", "tr", "sk"};
const std::vector<std::string> kNuclei = {"a", "e", "i", "o", "u"};
const std::vector<std::string> kCodas = {"", "n", "r", "l", "s", "k", "t"};

std::string shift_l2(const std::string& root) {
  // Systematic sound shift covering nearly the whole alphabet, so related
  // roots end up with almost disjoint spellings (and BPE subwords).
  static const std::map<char, char> table = {
      {'a', 'o'}, {'o', 'u'}, {'u', 'a'}, {'e', 'i'}, {'i', 'e'},
      {'b', 'p'}, {'p', 'b'}, {'d', 't'}, {'t', 'd'}, {'g', 'k'},
      {'k', 'g'}, {'v', 'f'}, {'f', 'v'}, {'s', 'z'}, {'z', 's'},
      {'r', 'l'}, {'l', 'r'}, {'m', 'n'}, {'n', 'm'}};
  std::string out;
  for (char c : root) {
    const auto it = table.find(c);
    out.push_back(it == table.end() ? c : it->second);
  }
  return out;
}

std::string make_root(Rng& rng, int syllables) {
  std::string root;
  for (int s = 0; s < syllables; ++s) {
    root += kOnsets[rng.index(kOnsets.size())];
    root += kNuclei[rng.index(kNuclei.size())];
    if (s + 1 == syllables || rng.uniform() < 0.3)
      root += kCodas[rng.index(kCodas.size())];
  }
  return root;
}

std::vector<Word> make_core(Rng& rng, int count) {
  std::vector<Word> words;
  std::map<std::string, bool> used;
  while (static_cast<int>(words.size()) < count) {
    const std::string root = make_root(rng, 1 + rng.index(2));
    if (used.count(root)) continue;
    used[root] = true;
    words.push_back({root, shift_l2(root)});
  }
  return words;
}

const std::vector<Word> kComplexSuffixes = {
    {"atsion", "assione"}, {"imenta", "imento"}, {"alitet", "alidade"},
    {"ografi", "ografia"}, {"ekturo", "ettura"}};

std::vector<Word> make_complex(Rng& rng, int count) {
  std::vector<Word> words;
  std::map<std::string, bool> used;
  while (static_cast<int>(words.size()) < count) {
    const std::string root = make_root(rng, 2);
    const Word& suffix = kComplexSuffixes[rng.index(kComplexSuffixes.size())];
    const std::string l1 = root + suffix.l1;
    if (used.count(l1)) continue;
    used[l1] = true;
    words.push_back({l1, shift_l2(root) + suffix.l2});
  }
  return words;
}

struct Lexicon {
  std::vector<Word> nouns, verbs, adjectives;
  std::vector<Word> complex_nouns, complex_adjectives;
  // Recurring polysyllabic phrases: fixed across the corpus so the long
  // sentences share dense n-gram statistics.
  std::vector<Chunk> collocations;
};

Lexicon make_lexicon(Rng& rng) {
  Lexicon lex;
  lex.nouns = make_core(rng, 120);
  lex.verbs = make_core(rng, 50);
  lex.adjectives = make_core(rng, 30);
  lex.complex_nouns = make_complex(rng, 90);
  lex.complex_adjectives = make_complex(rng, 40);
  for (int i = 0; i < 48; ++i) {
    const Word& a = lex.complex_nouns[rng.index(lex.complex_nouns.size())];
    const Word& b = lex.complex_nouns[rng.index(lex.complex_nouns.size())];
    const Word& adj =
        lex.complex_adjectives[rng.index(lex.complex_adjectives.size())];
    // l1: det a of adj b       l2: det a adj of b (adjective postposed)
    Chunk c;
    c.l1 = {kDet.l1, a.l1, kOf.l1, adj.l1, b.l1};
    c.l2 = {kDet.l2, a.l2, kOf.l2, b.l2, adj.l2};
    lex.collocations.push_back(c);
  }
  return lex;
}

std::string number_token(Rng& rng) {
  if (rng.uniform() < 0.5)
    return std::to_string(1806 + 2 * rng.index(94));  // years
  return std::to_string(2 + rng.index(96));           // counts
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& pool) {
  return pool[rng.index(pool.size())];
}

// Noun phrase with optional adjective; L2 postposes the adjective.
Chunk np(Rng& rng, const Lexicon& lex, const Word& det) {
  const Word& noun = pick(rng, lex.nouns);
  if (rng.uniform() < 0.3) {
    const Word& adj = pick(rng, lex.adjectives);
    return {{det.l1, adj.l1, noun.l1}, {det.l2, noun.l2, adj.l2}};
  }
  return {{det.l1, noun.l1}, {det.l2, noun.l2}};
}

Chunk simple_sentence(Rng& rng, const Lexicon& lex) {
  const Word& verb = pick(rng, lex.verbs);
  Chunk subj, obj, tail;
  // Shared anchors (names, numbers, cognates) appear in roughly two thirds
  // of the short sentences, usually just once.
  switch (rng.index(4)) {
    case 0:  // one name
      subj = shared(pick(rng, kNames));
      obj = np(rng, lex, kDet);
      tail = word(kIn) + np(rng, lex, kDet2);
      break;
    case 1:  // one number
      subj = np(rng, lex, kDet);
      obj = shared(number_token(rng)) + word(pick(rng, lex.nouns));
      break;
    case 2:  // one cognate or one name, with a second anchor now and then
      if (rng.uniform() < 0.5)
        subj = word(kDet2) + shared(pick(rng, kCognates));
      else
        subj = shared(pick(rng, kNames));
      obj = np(rng, lex, kDet);
      if (rng.uniform() < 0.3)
        tail = word(kIn) + shared(number_token(rng));
      else
        tail = word(kWith) + word(pick(rng, lex.nouns));
      break;
    default:  // no anchor at all
      subj = np(rng, lex, kDet);
      obj = word(kTo) + np(rng, lex, kDet2);
      tail = word(kFor) + word(pick(rng, lex.nouns));
      break;
  }
  // Half of the templates are verb-final on the L2 side.
  Chunk out;
  if (rng.uniform() < 0.5) {
    Chunk mid = word(verb) + obj + tail;
    out.l1 = (subj + mid).l1;
    Chunk l2_tail = obj + tail;
    out.l2 = subj.l2;
    out.l2.insert(out.l2.end(), l2_tail.l2.begin(), l2_tail.l2.end());
    out.l2.push_back(verb.l2);
  } else {
    out = subj + word(verb) + obj + tail;
  }
  out = out + shared(rng.uniform() < 0.1 ? "?" : ".");
  return out;
}

Chunk medium_sentence(Rng& rng, const Lexicon& lex) {
  Chunk subj = rng.uniform() < 0.2 ? shared(pick(rng, kNames))
                                   : np(rng, lex, kDet);
  const Word& verb = pick(rng, lex.verbs);
  Chunk obj = np(rng, lex, kDet2);
  if (rng.uniform() < 0.8) {
    const Word& cn = pick(rng, lex.complex_nouns);
    obj = obj + word(kOf) + word(cn);
  }
  Chunk pp;
  const double roll = rng.uniform();
  if (roll < 0.3)
    pp = word(kIn) + shared(number_token(rng));
  else if (roll < 0.45)
    pp = word(kIn) + shared(pick(rng, kCognates));
  else
    pp = word(kIn) + word(pick(rng, lex.nouns));
  const Word& conj = rng.uniform() < 0.5 ? kBut : kWhen;
  Chunk subj2 = np(rng, lex, kDet);
  const Word& verb2 = pick(rng, lex.verbs);
  Chunk obj2 = rng.uniform() < 0.4
                   ? word(kTo) + word(pick(rng, lex.complex_nouns))
                   : np(rng, lex, kDet2);

  // L2 keeps the main clause order but is verb-final in the subordinate.
  Chunk main_l = subj + word(verb) + obj + pp;
  Chunk out;
  out.l1 = main_l.l1;
  out.l1.push_back(",");
  Chunk sub_l1 = word(conj) + subj2 + word(verb2) + obj2;
  out.l1.insert(out.l1.end(), sub_l1.l1.begin(), sub_l1.l1.end());

  out.l2 = main_l.l2;
  out.l2.push_back(",");
  Chunk sub_l2 = word(conj) + subj2 + obj2;
  out.l2.insert(out.l2.end(), sub_l2.l2.begin(), sub_l2.l2.end());
  out.l2.push_back(verb2.l2);

  out = out + shared(".");
  return out;
}

Chunk complex_sentence(Rng& rng, const Lexicon& lex) {
  const Word& verb = pick(rng, lex.verbs);
  const Word& verb2 = pick(rng, lex.verbs);
  Chunk c1 = pick(rng, lex.collocations);
  Chunk c2 = pick(rng, lex.collocations);
  Chunk subj = rng.uniform() < 0.1 ? shared(pick(rng, kNames))
                                   : np(rng, lex, kDet);

  Chunk out = c1 + word(verb) + subj + word(kUnder) + c2;
  if (rng.uniform() < 0.6) {
    out = out + shared(",") + word(kIf) + np(rng, lex, kDet2) + word(kOf) +
          word(pick(rng, lex.complex_nouns)) + word(verb2);
  } else {
    out = out + word(kAnd) + word(pick(rng, lex.complex_adjectives)) +
          word(pick(rng, lex.complex_nouns)) + word(kFor) +
          (rng.uniform() < 0.15 ? shared(number_token(rng))
                                : word(pick(rng, lex.nouns)));
  }
  out = out + shared(".");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toy corpus generator"};
  std::string out_l1 = "data/toy.qaa";
  std::string out_l2 = "data/toy.qab";
  int n_pairs = 3200;
  std::uint64_t seed = 20258;
  app.add_option("--out-l1", out_l1);
  app.add_option("--out-l2", out_l2);
  app.add_option("--pairs", n_pairs);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  Rng rng(seed);
  const Lexicon lex = make_lexicon(rng);

  std::vector<Chunk> sentences;
  const int n_simple = n_pairs * 45 / 100;
  const int n_medium = n_pairs * 35 / 100;
  for (int i = 0; i < n_simple; ++i)
    sentences.push_back(simple_sentence(rng, lex));
  for (int i = 0; i < n_medium; ++i)
    sentences.push_back(medium_sentence(rng, lex));
  while (static_cast<int>(sentences.size()) < n_pairs)
    sentences.push_back(complex_sentence(rng, lex));
  rng.shuffle(sentences);

  std::ofstream f1(out_l1, std::ios::binary), f2(out_l2, std::ios::binary);
  if (!f1 || !f2) {
    std::cerr << "cannot write output files\n";
    return 1;
  }
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.l1.size(); ++i)
      f1 << (i ? " " : "") << s.l1[i];
    f1 << "\n";
    for (std::size_t i = 0; i < s.l2.size(); ++i)
      f2 << (i ? " " : "") << s.l2[i];
    f2 << "\n";
  }
  std::cout << "wrote " << sentences.size() << " parallel pairs\n";
  return 0;
}
