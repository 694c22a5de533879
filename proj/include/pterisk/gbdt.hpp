#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pterisk::gbdt {

struct TrainParams {
  double learning_rate = 0.05;
  int max_depth = 3;
  double l1_alpha = 0.5;
  double l2_lambda = 1.0;
  int max_rounds = 2000;
  int early_stop_rounds = 50;
  double scale_pos_weight = 1.0;  // computed from the training labels, never defaulted
  double min_child_hessian = 1e-6;
  double base_logit = 0.0;
};

void validate_params(const TrainParams& p);

// Flat preorder tree; children referenced by index. Leaf weights already
// carry the shrinkage factor.
struct TreeNode {
  bool is_leaf = true;
  int feature_index = -1;
  double threshold = 0.0;
  bool default_goes_left = true;  // route for missing values
  int left = -1;
  int right = -1;
  double weight = 0.0;

  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  bool operator==(const Tree&) const = default;
};

struct BoostedModel {
  std::vector<Tree> trees;
  double base_logit = 0.0;
  TrainParams params;
  int best_round = 0;  // prediction uses trees [0, best_round)

  // Diagnostics, one entry per grown round; not serialized.
  std::vector<double> train_loss_history;
  std::vector<double> valid_loss_history;
};

// Negatives-to-positives ratio of the training partition.
double compute_class_weight(const std::vector<int>& train_labels);

// Weighted logistic gradient and hessian at probability p for label y:
// with w = spw if y = 1 else 1, g = w*(p - y), h = w*p*(1 - p).
std::pair<double, double> grad_hess(double p, int y, double scale_pos_weight);

// Second-order leaf solution with L1 soft-thresholding:
// w = -soft(G, alpha) / (H + lambda).
double leaf_weight(double grad_sum, double hess_sum, const TrainParams& params);

double weighted_logloss(const Eigen::Ref<const Eigen::VectorXd>& logits,
                        const std::vector<int>& labels, double scale_pos_weight);

struct SplitCandidate {
  int feature_index = -1;
  double threshold = 0.0;
  bool default_goes_left = true;
  double gain = 0.0;
};

// Exact greedy search over midpoints of consecutive distinct values. Missing
// rows are tried on both sides; gain uses soft-thresholded scores
// soft(G,a)^2/(H+l). Ties break toward lower feature index, lower threshold,
// missing-left. Returns nullopt when no candidate has positive gain or a
// child hessian falls below min_child_hessian.
std::optional<SplitCandidate> best_split(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                         const std::vector<int>& node_rows,
                                         const Eigen::Ref<const Eigen::VectorXd>& grad,
                                         const Eigen::Ref<const Eigen::VectorXd>& hess,
                                         const TrainParams& params);

// Boosting with shrinkage; per-round weighted logistic loss on the validation
// partition drives early stopping and best_round selection. Deterministic:
// fixed tie-breaking and fixed left-to-right accumulation, single-threaded.
BoostedModel train(const Eigen::Ref<const Eigen::MatrixXd>& train_X,
                   const std::vector<int>& train_y,
                   const Eigen::Ref<const Eigen::MatrixXd>& valid_X,
                   const std::vector<int>& valid_y, const TrainParams& params);

double predict_logit(const BoostedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);
double predict_proba(const BoostedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);
Eigen::VectorXd predict_proba_batch(const BoostedModel& model,
                                    const Eigen::Ref<const Eigen::MatrixXd>& X);

// Structured-text round trip at full precision (bit-exact reload).
std::string model_to_json(const BoostedModel& model);
BoostedModel model_from_json(const std::string& text);
void save_model(const BoostedModel& model, const std::filesystem::path& path);
BoostedModel load_model(const std::filesystem::path& path);

}  // namespace pterisk::gbdt
