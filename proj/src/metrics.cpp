#include "pterisk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pterisk/errors.hpp"

namespace pterisk {

namespace {

struct Block {
  double score;
  int positives;
  int negatives;
};

// Descending-score tie blocks, plus total class counts.
struct Ranked {
  std::vector<Block> blocks;
  int total_pos = 0;
  int total_neg = 0;
};

Ranked rank_blocks(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  if (scores.empty()) throw DataError("undefined metric: empty input");
  for (double s : scores)
    if (!std::isfinite(s)) throw DataError("undefined metric: non-finite score");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  Ranked r;
  for (size_t idx : order) {
    if (r.blocks.empty() || r.blocks.back().score != scores[idx])
      r.blocks.push_back({scores[idx], 0, 0});
    (labels[idx] ? r.blocks.back().positives : r.blocks.back().negatives)++;
    (labels[idx] ? r.total_pos : r.total_neg)++;
  }
  if (r.total_pos == 0 || r.total_neg == 0)
    throw DataError("undefined metric: both classes required");
  return r;
}

}  // namespace

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  Ranked r = rank_blocks(scores, labels);
  double concordant = 0.0, tied = 0.0;
  int neg_seen = 0;
  for (const Block& b : r.blocks) {
    // Negatives ranked strictly below this block are concordant with its
    // positives; negatives inside the block tie.
    concordant += static_cast<double>(b.positives) * (r.total_neg - neg_seen - b.negatives);
    tied += static_cast<double>(b.positives) * b.negatives;
    neg_seen += b.negatives;
  }
  return (concordant + 0.5 * tied) /
         (static_cast<double>(r.total_pos) * static_cast<double>(r.total_neg));
}

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
  Ranked r = rank_blocks(scores, labels);
  double ap = 0.0;
  int tp = 0, fp = 0;
  double prev_recall = 0.0;
  for (const Block& b : r.blocks) {
    tp += b.positives;
    fp += b.negatives;
    double recall = static_cast<double>(tp) / r.total_pos;
    double precision = static_cast<double>(tp) / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double ppv_at_recall(const std::vector<double>& scores, const std::vector<int>& labels,
                     double target_recall) {
  if (target_recall <= 0.0 || target_recall > 1.0)
    throw ConfigError("target recall must lie in (0, 1]");
  Ranked r = rank_blocks(scores, labels);
  int tp = 0, fp = 0;
  for (const Block& b : r.blocks) {
    tp += b.positives;
    fp += b.negatives;
    double recall = static_cast<double>(tp) / r.total_pos;
    if (recall >= target_recall) return static_cast<double>(tp) / (tp + fp);
  }
  // Unreachable: the full-set cut has recall 1.
  throw DataError("undefined metric: recall target not reached");
}

MetricSet compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels) {
  MetricSet m;
  m.auroc = auroc(scores, labels);
  m.auprc = auprc(scores, labels);
  m.ppv_at_recall_30 = ppv_at_recall(scores, labels, 0.3);
  m.ppv_at_recall_50 = ppv_at_recall(scores, labels, 0.5);
  return m;
}

}  // namespace pterisk
