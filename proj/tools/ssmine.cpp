#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ssmine/experiment.hpp"

namespace fs = std::filesystem;
using namespace ssmine;

namespace {

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

// Timestamped experiment directory under the output root; TOOL_DATA_DIR
// overrides the configured root, an explicit --out-dir overrides both.
fs::path make_artifact_dir(const std::string& command,
                           const ExperimentConfig& config,
                           const std::string& out_dir_flag) {
  if (!out_dir_flag.empty()) {
    fs::create_directories(out_dir_flag);
    return out_dir_flag;
  }
  std::string root = config.out_root;
  if (const char* env = std::getenv("TOOL_DATA_DIR"); env && *env)
    root = env;
  fs::path dir = fs::path(root) / (command + "-" + timestamp_now());
  for (int n = 1; fs::exists(dir); ++n)
    dir = fs::path(root) / (command + "-" + timestamp_now() + "-" +
                            std::to_string(n));
  fs::create_directories(dir);
  return dir;
}

std::vector<std::pair<std::string, std::string>> read_parallel(
    const std::string& path_l1, const std::string& path_l2) {
  std::ifstream in1(path_l1, std::ios::binary), in2(path_l2, std::ios::binary);
  if (!in1) throw std::runtime_error("cannot read " + path_l1);
  if (!in2) throw std::runtime_error("cannot read " + path_l2);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string a, b;
  while (std::getline(in1, a)) {
    if (!std::getline(in2, b))
      throw std::runtime_error("parallel files differ in length");
    if (!a.empty() && a.back() == '\r') a.pop_back();
    if (!b.empty() && b.back() == '\r') b.pop_back();
    pairs.emplace_back(a, b);
  }
  if (std::getline(in2, b))
    throw std::runtime_error("parallel files differ in length");
  return pairs;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::runtime_error(message);
}

int run_synth(const ExperimentConfig& config, const fs::path& dir) {
  require(!config.parallel_l1.empty() && !config.parallel_l2.empty(),
          "synth requires parallel_l1 and parallel_l2");
  const auto parallel = read_parallel(config.parallel_l1, config.parallel_l2);

  SynthConfig sc;
  sc.n_true = config.n_true;
  sc.ratio = config.ratio;
  sc.article_len = config.article_len;
  sc.seed = stage_seed(config, Stage::synth);
  const SyntheticCorpus corpus = build_synthetic(parallel, sc);

  write_raw_corpus((dir / "corpus.l1.txt").string(), corpus.docs_l1);
  write_raw_corpus((dir / "corpus.l2.txt").string(), corpus.docs_l2);
  write_doc_pairs((dir / "pairs.tsv").string(), corpus.doc_pairs);
  write_truth((dir / "truth.tsv").string(), corpus.truth);
  write_provenance(dir.string(), config,
                   {config.parallel_l1, config.parallel_l2});
  std::cout << "synth: " << corpus.n_true << " true + " << corpus.n_false
            << " false pairs in " << corpus.docs_l1.size()
            << " article pairs -> " << dir.string() << "\n";
  return 0;
}

int run_prep(const ExperimentConfig& config, const fs::path& dir) {
  PreparedData data = prepare(config);
  data.bpe.save((dir / "bpe.model").string());
  {
    std::ofstream out(dir / "prep_stats.txt", std::ios::binary);
    out << "doc_pairs=" << data.corpus.doc_pairs.size() << "\n"
        << "dropped_docs=" << data.corpus.dropped_docs << "\n"
        << "dropped_sentences=" << data.corpus.dropped_sentences << "\n"
        << "vocab_size=" << data.bpe.vocab_size() << "\n"
        << "merges=" << data.bpe.merges().size() << "\n";
  }
  write_provenance(dir.string(), config,
                   {config.corpus_l1, config.corpus_l2, config.pairs_file});
  if (data.corpus.dropped_docs > 0)
    std::cerr << "warning: " << data.corpus.dropped_docs
              << " document pair(s) dropped by the length filter\n";
  std::cout << "prep: " << data.corpus.doc_pairs.size() << " doc pairs, "
            << data.bpe.merges().size() << " merges, vocab "
            << data.bpe.vocab_size() << " -> " << dir.string() << "\n";
  return 0;
}

int run_embed(const ExperimentConfig& config, const fs::path& dir) {
  const PreparedData data = prepare(config);
  const EmbeddingTable table = build_aligned_embeddings(data, config);
  save_embeddings((dir / "embeddings.txt").string(), table, data.id_to_token);
  write_provenance(dir.string(), config,
                   {config.corpus_l1, config.corpus_l2, config.pairs_file});
  std::cout << "embed: " << table.rows() << " x " << table.dim
            << " aligned table -> " << dir.string() << "\n";
  return 0;
}

int run_mine(const ExperimentConfig& config, const fs::path& dir) {
  const PreparedData data = prepare(config);
  const EmbeddingTable table = build_aligned_embeddings(data, config);
  const EncoderModel encoder = make_encoder(table, config);

  std::ofstream log_out(dir / "mininglog.tsv", std::ios::binary);
  require(static_cast<bool>(log_out), "cannot write mininglog.tsv");
  log_out << kMiningLogHeader << "\n";
  const LogSink sink = [&log_out](const LogRecord& rec) {
    log_out << format_log_record(rec) << "\n";
  };

  const RunResult run = run_loop(data.corpus, encoder, miner_config(config),
                                 sink);
  log_out.close();

  save_checkpoint((dir / "checkpoint.enc").string(), *run.model);
  write_exports(dir.string(), data.corpus, run);
  {
    std::ofstream out(dir / "run_summary.txt", std::ios::binary);
    for (const auto& e : run.epochs)
      out << "epoch=" << e.epoch << " accepted=" << e.accepted
          << " unique=" << e.unique_accepted
          << " train_steps=" << e.train_steps << "\n";
    out << "total_steps=" << run.total_steps << "\n";
    for (const auto& w : run.warnings) out << "warning=" << w << "\n";
  }
  std::vector<std::string> inputs = {config.corpus_l1, config.corpus_l2,
                                     config.pairs_file};
  if (!config.truth_file.empty()) inputs.push_back(config.truth_file);
  write_provenance(dir.string(), config, inputs);

  for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "mine: " << run.total_steps << " acceptances over "
            << run.epochs.size() << " epochs -> " << dir.string() << "\n";
  return 0;
}

int run_eval(const ExperimentConfig& config, const fs::path& dir) {
  require(!config.mining_log.empty(), "eval requires mining_log");
  require(!config.truth_file.empty(), "ground truth required");
  const auto log = read_mining_log(config.mining_log);
  const auto truth = read_truth(config.truth_file);
  const PrSeries series = accumulate(log, truth);
  write_pr_csv((dir / "pr.csv").string(), series);
  write_provenance(dir.string(), config,
                   {config.mining_log, config.truth_file});
  std::cout << "eval: " << series.size() << " P/R rows -> " << dir.string()
            << "\n";
  return 0;
}

int run_report(const ExperimentConfig& config, const fs::path& dir) {
  require(!config.mining_log.empty(), "report requires mining_log");
  const auto log = read_mining_log(config.mining_log);
  const PreparedData data = prepare(config);

  std::vector<std::vector<std::string>> mono_l1, mono_l2;
  for (const auto& doc : data.corpus.docs_l1)
    for (const auto& s : doc.sentences) mono_l1.push_back(s.surface_words);
  for (const auto& doc : data.corpus.docs_l2)
    for (const auto& s : doc.sentences) mono_l2.push_back(s.surface_words);
  const NGramLM lm_l1 = NGramLM::train(mono_l1, config.lm_order);
  const NGramLM lm_l2 = NGramLM::train(mono_l2, config.lm_order);
  const auto shared = shared_token_types(data.corpus);

  const CurriculumReport report = window_metrics(log, data.corpus, lm_l1,
                                                 lm_l2, shared, config.window);
  write_curriculum_csv((dir / "curriculum.csv").string(), report.series);
  write_correlations_csv((dir / "correlations.csv").string(),
                         report.correlations);
  write_gf_hist_csv((dir / "gf_hist.csv").string(), report.gf_hist);
  write_provenance(dir.string(), config,
                   {config.mining_log, config.corpus_l1, config.corpus_l2,
                    config.pairs_file});
  std::cout << "report: " << report.series.size() << " metric rows, "
            << report.correlations.size() << " correlations -> "
            << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised parallel-sentence mining engine"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> overrides;  // key=value collected from flags

  const std::vector<std::string> commands = {"prep", "embed", "synth",
                                             "mine", "eval", "report"};
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--out-dir", out_dir,
                    "exact artifact directory (default: timestamped)");
    // Every config key doubles as a flag; flags win over the file.
    for (const auto& key : ExperimentConfig::keys()) {
      sub->add_option_function<std::string>(
          "--" + key,
          [&overrides, key](const std::string& v) {
            overrides.push_back(key + "=" + v);
          });
    }
    sub->add_flag_callback("--log-rejects", [&overrides]() {
      overrides.push_back("log_rejects=1");
    });
  }

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  fs::path dir;
  bool dir_created = false;
  try {
    ExperimentConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }

    dir = make_artifact_dir(command, config, out_dir);
    dir_created = true;

    if (command == "synth") return run_synth(config, dir);
    if (command == "prep") return run_prep(config, dir);
    if (command == "embed") return run_embed(config, dir);
    if (command == "mine") return run_mine(config, dir);
    if (command == "eval") return run_eval(config, dir);
    return run_report(config, dir);
  } catch (const std::exception& e) {
    if (dir_created) {
      std::error_code ec;
      fs::remove_all(dir, ec);  // no partial artifacts
    }
    std::cerr << "ssmine " << command << ": " << e.what() << "\n";
    return 1;
  }
}
