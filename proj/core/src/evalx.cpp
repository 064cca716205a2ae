#include "ssmine/evalx.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace ssmine {

PrResult precision_recall(const std::set<PairKey>& extracted,
                          const std::set<PairKey>& truth) {
  if (truth.empty()) throw std::runtime_error("empty truth set");
  PrResult r;
  if (extracted.empty()) {
    r.precision = 1.0;
    r.empty_flagged = true;
    r.recall = 0.0;
    return r;
  }
  long long hits = 0;
  for (const auto& key : extracted) hits += truth.count(key);
  r.precision = static_cast<double>(hits) / extracted.size();
  r.recall = static_cast<double>(hits) / truth.size();
  return r;
}

PrSeries accumulate(const std::vector<LogRecord>& log,
                    const std::set<PairKey>& truth) {
  if (log.empty()) throw std::runtime_error("empty mining log");
  if (truth.empty()) throw std::runtime_error("empty truth set");

  int max_epoch = 0;
  for (const auto& r : log) max_epoch = std::max(max_epoch, r.epoch);

  const char* channels[] = {"w", "h", "dual"};
  PrSeries series;
  for (const char* channel : channels) {
    std::set<PairKey> cumulative;
    for (int epoch = 1; epoch <= max_epoch; ++epoch) {
      std::set<PairKey> epoch_set;
      for (const auto& r : log) {
        if (r.epoch != epoch) continue;
        const bool accepted = channel == std::string("w")   ? r.acc_w
                              : channel == std::string("h") ? r.acc_h
                                                            : r.acc_dual;
        if (accepted) epoch_set.insert(r.key);
      }
      cumulative.insert(epoch_set.begin(), epoch_set.end());

      const PrResult ep = precision_recall(epoch_set, truth);
      series.push_back({epoch, channel, "epoch", ep.precision, ep.recall,
                        static_cast<long long>(epoch_set.size()),
                        ep.empty_flagged});
      const PrResult ac = precision_recall(cumulative, truth);
      series.push_back({epoch, channel, "accumulated", ac.precision,
                        ac.recall, static_cast<long long>(cumulative.size()),
                        ac.empty_flagged});
    }
  }
  return series;
}

void write_pr_csv(const std::string& path, const PrSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,channel,mode,precision,recall,n_extracted,empty_flagged\n";
  char buf[64];
  for (const auto& p : series) {
    out << p.epoch << ',' << p.channel << ',' << p.mode << ',';
    std::snprintf(buf, sizeof buf, "%.10g,%.10g", p.precision, p.recall);
    out << buf << ',' << p.n_extracted << ',' << (p.empty_flagged ? 1 : 0)
        << "\n";
  }
}

}  // namespace ssmine
