#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfi/errors.hpp"
#include "qfi/matrix.hpp"
#include "qfi/xai.hpp"

namespace qfi {

struct GbdtParams {
  int n_rounds = 50;
  int max_depth = 3;
  double learning_rate = 0.3;
  double min_child_weight = 1.0;
  double reg_lambda = 1.0;
};

// Axis-aligned regression tree stored as a flat node array. Leaves have
// feature = -1; internal nodes route x[feature] < threshold to `left`.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  double gain = 0.0;   // split gain, for importance attribution
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict_row(std::span<const double> x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
      const TreeNode& n = nodes[static_cast<std::size_t>(node)];
      node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
  }
};

// Boosted logistic-loss trees with second-order split gain.
struct GbdtModel {
  std::vector<Tree> trees;
  double learning_rate = 0.3;
  int n_rounds = 0;
  double base_score = 0.0;  // log-odds
  std::size_t n_features = 0;
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct SplitCandidate {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// gain = 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)]
inline double split_gain(double gl, double hl, double gr, double hr, double lambda) {
  const double g = gl + gr, h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda));
}

inline SplitCandidate best_split(const Matrix& X, std::span<const int> rows,
                                 std::span<const double> grad, std::span<const double> hess,
                                 const GbdtParams& params) {
  SplitCandidate best;
  double g_total = 0.0, h_total = 0.0;
  for (const int r : rows) {
    g_total += grad[static_cast<std::size_t>(r)];
    h_total += hess[static_cast<std::size_t>(r)];
  }
  std::vector<std::pair<double, int>> sorted(rows.size());
  for (std::size_t f = 0; f < X.cols(); ++f) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      sorted[i] = {X(static_cast<std::size_t>(rows[i]), f), rows[i]};
    // row index as tie-break keeps split search fully deterministic
    std::sort(sorted.begin(), sorted.end());
    double gl = 0.0, hl = 0.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      gl += grad[static_cast<std::size_t>(sorted[i].second)];
      hl += hess[static_cast<std::size_t>(sorted[i].second)];
      if (sorted[i].first == sorted[i + 1].first) continue;
      const double hr = h_total - hl;
      if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
      const double gain = split_gain(gl, hl, g_total - gl, hr, params.reg_lambda);
      if (gain > best.gain) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

inline int build_node(Tree& tree, const Matrix& X, std::vector<int> rows,
                      std::span<const double> grad, std::span<const double> hess, int depth,
                      const GbdtParams& params) {
  double g = 0.0, h = 0.0;
  for (const int r : rows) {
    g += grad[static_cast<std::size_t>(r)];
    h += hess[static_cast<std::size_t>(r)];
  }
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (depth < params.max_depth) {
    const SplitCandidate split = best_split(X, rows, grad, hess, params);
    if (split.found && split.gain > 0.0) {
      std::vector<int> left_rows, right_rows;
      for (const int r : rows) {
        if (X(static_cast<std::size_t>(r), static_cast<std::size_t>(split.feature)) <
            split.threshold)
          left_rows.push_back(r);
        else
          right_rows.push_back(r);
      }
      tree.nodes[static_cast<std::size_t>(index)].feature = split.feature;
      tree.nodes[static_cast<std::size_t>(index)].threshold = split.threshold;
      tree.nodes[static_cast<std::size_t>(index)].gain = split.gain;
      const int left = build_node(tree, X, std::move(left_rows), grad, hess, depth + 1, params);
      const int right = build_node(tree, X, std::move(right_rows), grad, hess, depth + 1, params);
      tree.nodes[static_cast<std::size_t>(index)].left = left;
      tree.nodes[static_cast<std::size_t>(index)].right = right;
      return index;
    }
  }
  tree.nodes[static_cast<std::size_t>(index)].value = -g / (h + params.reg_lambda);
  return index;
}

}  // namespace detail

inline GbdtModel gbdt_fit(const Matrix& X, std::span<const int> y, const GbdtParams& params = {}) {
  if (X.rows() == 0) throw ValidationError("fit requires a nonempty data matrix");
  if (y.size() != X.rows()) throw ValidationError("label count does not match data rows");
  if (params.n_rounds < 0 || params.max_depth < 1 || !(params.learning_rate > 0.0))
    throw ValidationError("bad boosting parameters");
  std::size_t positives = 0;
  for (const int label : y) {
    if (label != 0 && label != 1) throw ValidationError("labels must be 0/1");
    positives += static_cast<std::size_t>(label);
  }
  if (positives == 0 || positives == y.size())
    throw DegenerateLabelsError("training labels contain a single class");

  GbdtModel model;
  model.learning_rate = params.learning_rate;
  model.n_rounds = params.n_rounds;
  model.n_features = X.cols();
  const double prior =
      std::clamp(static_cast<double>(positives) / static_cast<double>(y.size()), 1e-6, 1.0 - 1e-6);
  model.base_score = std::log(prior / (1.0 - prior));

  std::vector<double> margin(X.rows(), model.base_score);
  std::vector<double> grad(X.rows()), hess(X.rows());
  std::vector<int> all_rows(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) all_rows[i] = static_cast<int>(i);

  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < X.rows(); ++i) {
      const double p = detail::sigmoid(margin[i]);
      grad[i] = p - static_cast<double>(y[i]);
      hess[i] = p * (1.0 - p);
    }
    Tree tree;
    detail::build_node(tree, X, all_rows, grad, hess, 0, params);
    for (std::size_t i = 0; i < X.rows(); ++i)
      margin[i] += params.learning_rate * tree.predict_row(X.row(i));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

// probability = sigmoid(base_score + lr * sum of tree outputs)
inline std::vector<double> gbdt_predict_proba(const GbdtModel& model, const Matrix& X) {
  if (X.cols() != model.n_features)
    throw ValidationError("data has " + std::to_string(X.cols()) + " features, model expects " +
                          std::to_string(model.n_features));
  std::vector<double> probs(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double margin = model.base_score;
    for (const Tree& tree : model.trees)
      margin += model.learning_rate * tree.predict_row(X.row(i));
    probs[i] = detail::sigmoid(margin);
  }
  return probs;
}

// Threshold 0.5; ties go to class 1.
inline std::vector<int> gbdt_predict(const GbdtModel& model, const Matrix& X) {
  const std::vector<double> probs = gbdt_predict_proba(model, X);
  std::vector<int> labels(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) labels[i] = probs[i] >= 0.5 ? 1 : 0;
  return labels;
}

// Total split gain per feature across all trees, normalized to sum 1. A model
// with no split at all falls back to a uniform vector.
inline ImportanceVector gbdt_feature_importance(const GbdtModel& model) {
  ImportanceVector importance;
  importance.method = ExplainerMethod::PI;  // native attribution, tagged by caller
  importance.model_id = "gbdt";
  importance.scores.assign(model.n_features, 0.0);
  double total = 0.0;
  for (const Tree& tree : model.trees) {
    for (const TreeNode& node : tree.nodes) {
      if (node.feature >= 0) {
        importance.scores[static_cast<std::size_t>(node.feature)] += node.gain;
        total += node.gain;
      }
    }
  }
  if (total > 0.0) {
    for (double& s : importance.scores) s /= total;
  } else {
    const double uniform = 1.0 / static_cast<double>(model.n_features);
    for (double& s : importance.scores) s = uniform;
  }
  return importance;
}

inline nlohmann::json gbdt_to_json(const GbdtModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes)
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value},
                       {"gain", n.gain}});
    trees.push_back(std::move(nodes));
  }
  return nlohmann::json{{"trees", std::move(trees)},
                        {"learning_rate", model.learning_rate},
                        {"n_rounds", model.n_rounds},
                        {"base_score", model.base_score},
                        {"n_features", model.n_features}};
}

inline GbdtModel gbdt_from_json(const nlohmann::json& j) {
  GbdtModel model;
  j.at("learning_rate").get_to(model.learning_rate);
  j.at("n_rounds").get_to(model.n_rounds);
  j.at("base_score").get_to(model.base_score);
  j.at("n_features").get_to(model.n_features);
  for (const auto& tj : j.at("trees")) {
    Tree tree;
    for (const auto& nj : tj) {
      TreeNode n;
      nj.at("feature").get_to(n.feature);
      nj.at("threshold").get_to(n.threshold);
      nj.at("left").get_to(n.left);
      nj.at("right").get_to(n.right);
      nj.at("value").get_to(n.value);
      nj.at("gain").get_to(n.gain);
      tree.nodes.push_back(n);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace qfi
