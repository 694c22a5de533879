#pragma once

#include <vector>

namespace pterisk {

struct MetricSet {
  double auroc = 0.0;
  double auprc = 0.0;
  double ppv_at_recall_30 = 0.0;
  double ppv_at_recall_50 = 0.0;
};

// Mann-Whitney formulation: (#concordant pairs + 0.5 * #tied pairs) / (P*N).
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Block-tied average precision: descending-score cut points with equal scores
// processed as one block; sum of delta-recall times precision-at-cut.
double auprc(const std::vector<double>& scores, const std::vector<int>& labels);

// Precision at the first descending-score cut whose recall reaches the
// target; tied scores form one cut.
double ppv_at_recall(const std::vector<double>& scores, const std::vector<int>& labels,
                     double target_recall);

MetricSet compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace pterisk
