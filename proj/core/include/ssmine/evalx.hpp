#pragma once

#include <set>
#include <string>
#include <vector>

#include "ssmine/miner.hpp"
#include "ssmine/textprep.hpp"

namespace ssmine {

struct PrPoint {
  int epoch = 0;
  std::string channel;  // "w", "h" or "dual"
  std::string mode;     // "epoch" or "accumulated"
  double precision = 0.0;
  double recall = 0.0;
  long long n_extracted = 0;
  bool empty_flagged = false;  // precision reported as 1.0 on an empty set
};

using PrSeries = std::vector<PrPoint>;

struct PrResult {
  double precision = 0.0;
  double recall = 0.0;
  bool empty_flagged = false;
};

// Set precision/recall over positional pair keys. Precision of an empty
// extraction is reported as 1.0 with the flag set, so silent epochs do not
// read as quality collapse. Throws on empty truth.
PrResult precision_recall(const std::set<PairKey>& extracted,
                          const std::set<PairKey>& truth);

// Epoch-wise and accumulated P/R per representation channel, re-derived
// from the mining log alone. Pairs are deduplicated by positional key
// within each epoch and across the accumulated union.
PrSeries accumulate(const std::vector<LogRecord>& log,
                    const std::set<PairKey>& truth);

// pr.csv with one row per PrPoint.
void write_pr_csv(const std::string& path, const PrSeries& series);

}  // namespace ssmine
