#include "ssmine/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace ssmine {

namespace {

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': bad integer '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': bad number '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::runtime_error("config key '" + key + "': bad boolean '" + v + "'");
}

#define STR_FIELD(section, name)                                            \
  Field{section, #name,                                                     \
        [](const ExperimentConfig& c) { return c.name; },                   \
        [](ExperimentConfig& c, const std::string& v) { c.name = v; }}
#define INT_FIELD(section, name)                                            \
  Field{section, #name,                                                     \
        [](const ExperimentConfig& c) { return std::to_string(c.name); },   \
        [](ExperimentConfig& c, const std::string& v) {                     \
          c.name = to_int(#name, v);                                        \
        }}
#define DBL_FIELD(section, name)                                            \
  Field{section, #name,                                                     \
        [](const ExperimentConfig& c) { return fmt_double(c.name); },       \
        [](ExperimentConfig& c, const std::string& v) {                     \
          c.name = to_double(#name, v);                                     \
        }}
#define BOOL_FIELD(section, name)                                           \
  Field{section, #name,                                                     \
        [](const ExperimentConfig& c) {                                     \
          return std::string(c.name ? "1" : "0");                           \
        },                                                                  \
        [](ExperimentConfig& c, const std::string& v) {                     \
          c.name = to_bool(#name, v);                                       \
        }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      STR_FIELD("paths", corpus_l1),
      STR_FIELD("paths", corpus_l2),
      STR_FIELD("paths", pairs_file),
      STR_FIELD("paths", truth_file),
      STR_FIELD("paths", parallel_l1),
      STR_FIELD("paths", parallel_l2),
      STR_FIELD("paths", bpe_model),
      STR_FIELD("paths", embeddings_file),
      STR_FIELD("paths", mining_log),
      STR_FIELD("paths", out_root),
      STR_FIELD("paths", lang_l1),
      STR_FIELD("paths", lang_l2),
      INT_FIELD("textprep", n_merges),
      INT_FIELD("textprep", min_len),
      INT_FIELD("textprep", max_len),
      INT_FIELD("embeddings", emb_dim),
      INT_FIELD("embeddings", emb_window),
      INT_FIELD("embeddings", emb_negatives),
      INT_FIELD("embeddings", emb_epochs),
      DBL_FIELD("embeddings", emb_lr),
      INT_FIELD("embeddings", seed_dict_size),
      INT_FIELD("encoder", d_h),
      DBL_FIELD("encoder", enc_lr),
      DBL_FIELD("encoder", gamma),
      INT_FIELD("encoder", enc_negatives),
      DBL_FIELD("encoder", enc_init_gain),
      DBL_FIELD("encoder", enc_init_bias),
      INT_FIELD("miner", k),
      INT_FIELD("miner", batch_size),
      INT_FIELD("miner", epochs),
      BOOL_FIELD("miner", log_rejects),
      BOOL_FIELD("miner", score_only),
      INT_FIELD("miner", threads),
      INT_FIELD("synth", n_true),
      DBL_FIELD("synth", ratio),
      INT_FIELD("synth", article_len),
      INT_FIELD("curriculum", lm_order),
      INT_FIELD("curriculum", window),
      Field{"run", "seed",
            [](const ExperimentConfig& c) { return std::to_string(c.seed); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.seed = std::stoull(v);
              } catch (const std::exception&) {
                throw std::runtime_error("config key 'seed': bad integer '" +
                                         v + "'");
              }
            }},
  };
  return table;
}

#undef STR_FIELD
#undef INT_FIELD
#undef DBL_FIELD
#undef BOOL_FIELD

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  throw std::runtime_error("unknown config key '" + key + "'");
}

std::string ExperimentConfig::get(const std::string& key) const {
  for (const auto& f : fields())
    if (key == f.key) return f.get(*this);
  throw std::runtime_error("unknown config key '" + key + "'");
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return names;
}

std::string ExperimentConfig::resolved() const {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out << "\n";
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << "=" << f.get(*this) << "\n";
  }
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": unterminated section header");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key=value");
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    config.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

}  // namespace ssmine
