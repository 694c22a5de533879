#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately naive (pair enumeration, explicit cut scans, re-derived hash
// arithmetic) so they cannot share a bug with the library path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

namespace oracles {

// --- rank metrics by exhaustive enumeration --------------------------------

inline double auroc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double concordant = 0.0, tied = 0.0;
  long pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        concordant += 1.0;
      else if (scores[i] == scores[j])
        tied += 1.0;
    }
  }
  if (pairs == 0) throw std::runtime_error("oracle: need both classes");
  return (concordant + 0.5 * tied) / static_cast<double>(pairs);
}

// Every distinct score is a cut; the cut keeps all items with score >= c.
struct Cut {
  int tp = 0;
  int fp = 0;
};

inline std::vector<Cut> enumerate_cuts(const std::vector<double>& scores,
                                       const std::vector<int>& labels) {
  std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
  std::vector<Cut> cuts;
  for (double c : thresholds) {
    Cut cut;
    for (size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= c) {
        if (labels[i])
          ++cut.tp;
        else
          ++cut.fp;
      }
    }
    cuts.push_back(cut);
  }
  return cuts;
}

inline double auprc_cuts(const std::vector<double>& scores, const std::vector<int>& labels) {
  int total_pos = 0;
  for (int y : labels) total_pos += y;
  if (total_pos == 0 || total_pos == static_cast<int>(labels.size()))
    throw std::runtime_error("oracle: need both classes");
  double ap = 0.0, prev_recall = 0.0;
  for (const Cut& cut : enumerate_cuts(scores, labels)) {
    double recall = static_cast<double>(cut.tp) / total_pos;
    double precision = static_cast<double>(cut.tp) / (cut.tp + cut.fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

inline double ppv_at_recall_cuts(const std::vector<double>& scores, const std::vector<int>& labels,
                                 double target) {
  int total_pos = 0;
  for (int y : labels) total_pos += y;
  if (total_pos == 0 || total_pos == static_cast<int>(labels.size()))
    throw std::runtime_error("oracle: need both classes");
  for (const Cut& cut : enumerate_cuts(scores, labels)) {
    double recall = static_cast<double>(cut.tp) / total_pos;
    if (recall >= target) return static_cast<double>(cut.tp) / (cut.tp + cut.fp);
  }
  throw std::runtime_error("oracle: target recall unreachable");
}

// --- hash-expansion re-derivation -------------------------------------------

// Re-states the documented token expansion from scratch: FNV-1a over the
// token bytes, xor the seed, advance by the 64-bit golden-ratio stride per
// coordinate, splitmix64 finalize, map the top 53 bits onto [-1, 1).
inline std::vector<float> hash_expansion_reference(const std::string& token, uint64_t seed,
                                                   int dim) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : token) {
    h ^= static_cast<uint64_t>(c);
    h *= 1099511628211ull;
  }
  const uint64_t base = h ^ seed;
  std::vector<float> out;
  out.reserve(static_cast<size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    uint64_t x = base + static_cast<uint64_t>(j) * 0x9e3779b97f4a7c15ull;
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    x = x ^ (x >> 31);
    double unit = static_cast<double>(x >> 11) * std::pow(2.0, -53);
    out.push_back(static_cast<float>(2.0 * unit - 1.0));
  }
  return out;
}

// --- fixed-point logistic convergence ----------------------------------------

// Brute-force gradient iteration for a constant-feature model: a single
// shared logit nudged by damped Newton steps until the weighted gradient
// vanishes. Used to pin the base-rate fixed point.
inline double logistic_base_rate_fixed_point(int positives, int negatives, double spw) {
  double logit = 0.0;
  for (int iter = 0; iter < 100000; ++iter) {
    double p = 1.0 / (1.0 + std::exp(-logit));
    double g = spw * positives * (p - 1.0) + negatives * p;
    double h = spw * positives * p * (1.0 - p) + negatives * p * (1.0 - p);
    double step = g / (h + 1e-12);
    logit -= 0.5 * step;
    if (std::abs(g) < 1e-12) break;
  }
  return 1.0 / (1.0 + std::exp(-logit));
}

}  // namespace oracles
