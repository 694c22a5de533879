#include "pterisk/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pterisk/errors.hpp"
#include "pterisk/io_util.hpp"

namespace pterisk::gbdt {

using json = nlohmann::ordered_json;

namespace {

constexpr double kProbClamp = 1e-7;
constexpr double kLossImprovementEps = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double soft_threshold(double g, double alpha) {
  double mag = std::abs(g) - alpha;
  if (mag <= 0.0) return 0.0;
  return g > 0.0 ? mag : -mag;
}

double structure_score(double g, double h, const TrainParams& p) {
  double s = soft_threshold(g, p.l1_alpha);
  return s * s / (h + p.l2_lambda);
}

}  // namespace

void validate_params(const TrainParams& p) {
  if (p.learning_rate <= 0.0 || p.learning_rate > 1.0)
    throw ConfigError("learning_rate must lie in (0, 1]");
  if (p.max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (p.l1_alpha < 0.0 || p.l2_lambda < 0.0) throw ConfigError("regularizers must be >= 0");
  if (p.max_rounds < 1) throw ConfigError("max_rounds must be at least 1");
  if (p.early_stop_rounds < 1) throw ConfigError("early_stop_rounds must be at least 1");
  if (p.scale_pos_weight <= 0.0) throw ConfigError("scale_pos_weight must be positive");
  if (p.min_child_hessian < 0.0) throw ConfigError("min_child_hessian must be >= 0");
}

double compute_class_weight(const std::vector<int>& train_labels) {
  size_t pos = 0, neg = 0;
  for (int y : train_labels) (y ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw DataError("class weight undefined: training labels contain a single class");
  return static_cast<double>(neg) / static_cast<double>(pos);
}

std::pair<double, double> grad_hess(double p, int y, double scale_pos_weight) {
  p = clamp_prob(p);
  double w = y ? scale_pos_weight : 1.0;
  return {w * (p - static_cast<double>(y)), w * p * (1.0 - p)};
}

double leaf_weight(double grad_sum, double hess_sum, const TrainParams& params) {
  return -soft_threshold(grad_sum, params.l1_alpha) / (hess_sum + params.l2_lambda);
}

double weighted_logloss(const Eigen::Ref<const Eigen::VectorXd>& logits,
                        const std::vector<int>& labels, double scale_pos_weight) {
  double loss = 0.0, weight = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    double p = clamp_prob(sigmoid(logits(i)));
    int y = labels[static_cast<size_t>(i)];
    double w = y ? scale_pos_weight : 1.0;
    loss += w * -(y ? std::log(p) : std::log(1.0 - p));
    weight += w;
  }
  return loss / weight;
}

std::optional<SplitCandidate> best_split(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                         const std::vector<int>& node_rows,
                                         const Eigen::Ref<const Eigen::VectorXd>& grad,
                                         const Eigen::Ref<const Eigen::VectorXd>& hess,
                                         const TrainParams& params) {
  if (node_rows.size() < 2) return std::nullopt;

  double total_g = 0.0, total_h = 0.0;
  for (int r : node_rows) {
    total_g += grad(r);
    total_h += hess(r);
  }
  const double parent_score = structure_score(total_g, total_h, params);

  SplitCandidate best;
  best.gain = 0.0;
  bool found = false;

  std::vector<std::pair<double, int>> present;
  present.reserve(node_rows.size());
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    present.clear();
    double present_g = 0.0, present_h = 0.0;
    for (int r : node_rows) {
      double v = X(r, f);
      if (std::isnan(v)) continue;
      present.emplace_back(v, r);
      present_g += grad(r);
      present_h += hess(r);
    }
    if (present.size() < 2) continue;
    std::stable_sort(present.begin(), present.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    const double miss_g = total_g - present_g;
    const double miss_h = total_h - present_h;

    double left_g = 0.0, left_h = 0.0;
    for (size_t i = 0; i + 1 < present.size(); ++i) {
      left_g += grad(present[i].second);
      left_h += hess(present[i].second);
      if (present[i + 1].first <= present[i].first) continue;
      const double threshold = present[i].first + 0.5 * (present[i + 1].first - present[i].first);

      // Missing rows tried on both sides; the better side becomes the
      // stored default. Left is evaluated first so exact ties keep it.
      for (int miss_left = 1; miss_left >= 0; --miss_left) {
        double gl = left_g + (miss_left ? miss_g : 0.0);
        double hl = left_h + (miss_left ? miss_h : 0.0);
        double gr = total_g - gl;
        double hr = total_h - hl;
        if (hl < params.min_child_hessian || hr < params.min_child_hessian) continue;
        double gain =
            0.5 * (structure_score(gl, hl, params) + structure_score(gr, hr, params) - parent_score);
        if (gain > best.gain + kLossImprovementEps ||
            (!found && gain > 0.0)) {
          best.feature_index = static_cast<int>(f);
          best.threshold = threshold;
          best.default_goes_left = miss_left == 1;
          best.gain = gain;
          found = true;
        }
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

namespace {

struct TreeBuilder {
  const Eigen::Ref<const Eigen::MatrixXd>& X;
  const Eigen::VectorXd& grad;
  const Eigen::VectorXd& hess;
  const TrainParams& params;
  Tree tree;

  int build(const std::vector<int>& rows, int depth) {
    double g = 0.0, h = 0.0;
    for (int r : rows) {
      g += grad(r);
      h += hess(r);
    }
    int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::optional<SplitCandidate> split;
    if (depth < params.max_depth && rows.size() >= 2)
      split = best_split(X, rows, grad, hess, params);

    if (!split) {
      tree.nodes[index].is_leaf = true;
      tree.nodes[index].weight = params.learning_rate * leaf_weight(g, h, params);
      return index;
    }

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (int r : rows) {
      double v = X(r, split->feature_index);
      bool goes_left = std::isnan(v) ? split->default_goes_left : v < split->threshold;
      (goes_left ? left_rows : right_rows).push_back(r);
    }

    tree.nodes[index].is_leaf = false;
    tree.nodes[index].feature_index = split->feature_index;
    tree.nodes[index].threshold = split->threshold;
    tree.nodes[index].default_goes_left = split->default_goes_left;
    tree.nodes[index].left = build(left_rows, depth + 1);
    tree.nodes[index].right = build(right_rows, depth + 1);
    return index;
  }
};

void check_features(const Eigen::Ref<const Eigen::MatrixXd>& X, const char* which) {
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      double v = X(i, j);
      if (std::isinf(v))
        throw DataError(std::string(which) + " features contain a non-finite value at (" +
                        std::to_string(i) + ", " + std::to_string(j) + ")");
    }
}

}  // namespace

double Tree::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int index = 0;
  while (!nodes[static_cast<size_t>(index)].is_leaf) {
    const TreeNode& n = nodes[static_cast<size_t>(index)];
    double v = x(n.feature_index);
    bool goes_left = std::isnan(v) ? n.default_goes_left : v < n.threshold;
    index = goes_left ? n.left : n.right;
  }
  return nodes[static_cast<size_t>(index)].weight;
}

BoostedModel train(const Eigen::Ref<const Eigen::MatrixXd>& train_X,
                   const std::vector<int>& train_y,
                   const Eigen::Ref<const Eigen::MatrixXd>& valid_X,
                   const std::vector<int>& valid_y, const TrainParams& params) {
  validate_params(params);
  if (train_X.rows() == 0 || valid_X.rows() == 0)
    throw DataError("train and validation partitions must be non-empty");
  if (train_X.rows() != static_cast<Eigen::Index>(train_y.size()) ||
      valid_X.rows() != static_cast<Eigen::Index>(valid_y.size()))
    throw DataError("label count does not match row count");
  if (train_X.cols() != valid_X.cols())
    throw DataError("train and validation feature widths differ");
  check_features(train_X, "training");
  check_features(valid_X, "validation");
  bool has_pos = false, has_neg = false;
  for (int y : train_y) (y ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DataError("training partition must contain both classes");

  const Eigen::Index n_train = train_X.rows();
  const Eigen::Index n_valid = valid_X.rows();

  BoostedModel model;
  model.base_logit = params.base_logit;
  model.params = params;

  Eigen::VectorXd train_logits = Eigen::VectorXd::Constant(n_train, params.base_logit);
  Eigen::VectorXd valid_logits = Eigen::VectorXd::Constant(n_valid, params.base_logit);
  Eigen::VectorXd grad(n_train), hess(n_train);

  std::vector<int> all_rows(static_cast<size_t>(n_train));
  std::iota(all_rows.begin(), all_rows.end(), 0);

  // Round 0 baseline: the empty ensemble competes for best_round.
  double best_valid = weighted_logloss(valid_logits, valid_y, params.scale_pos_weight);
  model.best_round = 0;
  int rounds_since_best = 0;

  for (int round = 0; round < params.max_rounds; ++round) {
    for (Eigen::Index i = 0; i < n_train; ++i) {
      auto [g, h] = grad_hess(sigmoid(train_logits(i)), train_y[static_cast<size_t>(i)],
                              params.scale_pos_weight);
      grad(i) = g;
      hess(i) = h;
    }
    TreeBuilder builder{train_X, grad, hess, params, {}};
    builder.build(all_rows, 0);
    model.trees.push_back(std::move(builder.tree));
    const Tree& tree = model.trees.back();

    for (Eigen::Index i = 0; i < n_train; ++i) train_logits(i) += tree.evaluate(train_X.row(i));
    for (Eigen::Index i = 0; i < n_valid; ++i) valid_logits(i) += tree.evaluate(valid_X.row(i));

    model.train_loss_history.push_back(
        weighted_logloss(train_logits, train_y, params.scale_pos_weight));
    double valid_loss = weighted_logloss(valid_logits, valid_y, params.scale_pos_weight);
    model.valid_loss_history.push_back(valid_loss);

    if (valid_loss < best_valid - kLossImprovementEps) {
      best_valid = valid_loss;
      model.best_round = round + 1;
      rounds_since_best = 0;
    } else {
      ++rounds_since_best;
      if (rounds_since_best >= params.early_stop_rounds) break;
    }
  }
  return model;
}

double predict_logit(const BoostedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  double logit = model.base_logit;
  for (int t = 0; t < model.best_round; ++t)
    logit += model.trees[static_cast<size_t>(t)].evaluate(x);
  return logit;
}

double predict_proba(const BoostedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return sigmoid(predict_logit(model, x));
}

Eigen::VectorXd predict_proba_batch(const BoostedModel& model,
                                    const Eigen::Ref<const Eigen::MatrixXd>& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = sigmoid(predict_logit(model, X.row(i)));
  return out;
}

// --- serialization ---------------------------------------------------------

std::string model_to_json(const BoostedModel& model) {
  json j;
  j["format_version"] = 1;
  json params;
  params["learning_rate"] = model.params.learning_rate;
  params["max_depth"] = model.params.max_depth;
  params["l1_alpha"] = model.params.l1_alpha;
  params["l2_lambda"] = model.params.l2_lambda;
  params["max_rounds"] = model.params.max_rounds;
  params["early_stop_rounds"] = model.params.early_stop_rounds;
  params["scale_pos_weight"] = model.params.scale_pos_weight;
  params["min_child_hessian"] = model.params.min_child_hessian;
  params["base_logit"] = model.params.base_logit;
  j["params"] = params;
  j["base_logit"] = model.base_logit;
  j["best_round"] = model.best_round;
  json trees = json::array();
  for (const Tree& tree : model.trees) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes) {
      if (n.is_leaf) {
        nodes.push_back(json{{"leaf", n.weight}});
      } else {
        nodes.push_back(json{{"feature", n.feature_index},
                             {"threshold", n.threshold},
                             {"default_left", n.default_goes_left},
                             {"left", n.left},
                             {"right", n.right}});
      }
    }
    trees.push_back(nodes);
  }
  j["trees"] = trees;
  return j.dump(2) + "\n";
}

BoostedModel model_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.at("format_version").get<int>() != 1)
    throw DataError("unsupported model format version");
  BoostedModel model;
  const json& params = j.at("params");
  model.params.learning_rate = params.at("learning_rate").get<double>();
  model.params.max_depth = params.at("max_depth").get<int>();
  model.params.l1_alpha = params.at("l1_alpha").get<double>();
  model.params.l2_lambda = params.at("l2_lambda").get<double>();
  model.params.max_rounds = params.at("max_rounds").get<int>();
  model.params.early_stop_rounds = params.at("early_stop_rounds").get<int>();
  model.params.scale_pos_weight = params.at("scale_pos_weight").get<double>();
  model.params.min_child_hessian = params.at("min_child_hessian").get<double>();
  model.params.base_logit = params.at("base_logit").get<double>();
  model.base_logit = j.at("base_logit").get<double>();
  model.best_round = j.at("best_round").get<int>();
  for (const json& nodes : j.at("trees")) {
    Tree tree;
    for (const json& n : nodes) {
      TreeNode node;
      if (n.contains("leaf")) {
        node.is_leaf = true;
        node.weight = n.at("leaf").get<double>();
      } else {
        node.is_leaf = false;
        node.feature_index = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.default_goes_left = n.at("default_left").get<bool>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
      }
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  if (model.best_round > static_cast<int>(model.trees.size()))
    throw DataError("model best_round exceeds tree count");
  return model;
}

void save_model(const BoostedModel& model, const std::filesystem::path& path) {
  atomic_write_file(path, model_to_json(model));
}

BoostedModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

}  // namespace pterisk::gbdt
