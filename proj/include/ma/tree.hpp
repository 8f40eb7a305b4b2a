#pragma once

#include "ma/common.hpp"

#include <optional>
#include <vector>

namespace ma {

enum class TreeTask { classify, regress };

struct TreeParams {
  double alpha = 0.0;              // missingness-reliance regularization strength
  int max_depth = 3;               // >= 1
  int min_samples_split = 2;       // >= 2
  double min_impurity_decrease = 0.0;
  double feature_subsample = 1.0;  // fraction of features per node; <= 0 means ceil(sqrt(d))/d
  std::uint64_t seed = 0;          // drives per-node feature subsampling only
};

struct TreeNode {
  int feature = -1;      // split feature, internal nodes only
  double threshold = 0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0;  // leaf value: positive fraction (classify) or mean target (regress)
  int count = 0;     // training samples routed through this node

  bool is_leaf() const { return left < 0; }
};

/// Binary threshold tree over imputed features. Nodes live in an arena;
/// node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  int root = 0;
  TreeParams params;
  TreeTask task = TreeTask::classify;

  template <class Derived>
  int leaf_for(const Eigen::MatrixBase<Derived>& row) const {
    int u = root;
    while (!nodes[u].is_leaf())
      u = row[nodes[u].feature] <= nodes[u].threshold ? nodes[u].left : nodes[u].right;
    return u;
  }

  template <class Derived>
  double predict(const Eigen::MatrixBase<Derived>& row) const {
    if (nodes.empty()) throw ContractError("predict on empty tree");
    for (int u = root; !nodes[u].is_leaf();) {
      if (std::isnan(row[nodes[u].feature]))
        throw ContractError("predict: NA routed through node feature; impute first");
      u = row[nodes[u].feature] <= nodes[u].threshold ? nodes[u].left : nodes[u].right;
    }
    return nodes[leaf_for(row)].value;
  }

  /// Root-to-leaf node id sequence for one input row.
  template <class Derived>
  std::vector<int> decision_path(const Eigen::MatrixBase<Derived>& row) const {
    if (nodes.empty()) throw ContractError("decision_path on empty tree");
    std::vector<int> path;
    int u = root;
    path.push_back(u);
    while (!nodes[u].is_leaf()) {
      if (std::isnan(row[nodes[u].feature]))
        throw ContractError("decision_path: NA routed through node feature; impute first");
      u = row[nodes[u].feature] <= nodes[u].threshold ? nodes[u].left : nodes[u].right;
      path.push_back(u);
    }
    return path;
  }

  VectorXd predict(const MatrixXd& x) const;
  int depth() const;
  int leaf_count() const;
};

/// Gini impurity from binary class counts: sum_c p_c (1 - p_c).
double gini(double count0, double count1);

/// Fraction of node samples whose feature-j cell is missing, weighted by the
/// per-sample sigma multiplier. The alpha factor is applied by the caller;
/// the value is threshold-independent.
double split_penalty(const std::vector<int>& node_samples, int feature, const MaskMatrix& mask,
                     const SigmaWeights* sigma);

struct Split {
  int feature = -1;
  double threshold = 0;
  double score = 0;    // weighted child criterion + alpha * penalty
  double penalty = 0;  // sigma-weighted missing fraction for the chosen feature
  double gain = 0;     // parent criterion - score
};

/// Best (feature, threshold) over midpoint candidates, minimizing the
/// regularized criterion with (score, feature, threshold) tie-breaking.
/// Returns nullopt when no candidate reduces the parent criterion by at
/// least min_impurity_decrease.
std::optional<Split> best_split(const MatrixXd& x, const MaskMatrix& mask,
                                const VectorXd& targets, const std::vector<int>& node_samples,
                                const TreeParams& params, TreeTask task,
                                const SigmaWeights* sigma,
                                const std::vector<int>& feature_subset,
                                const VectorXd* sample_weight);

/// Greedy regularized induction. samples defaults to all rows (duplicates
/// allowed, e.g. bootstrap resamples); sigma defaults to all ones.
DecisionTree fit_tree(const MatrixXd& x, const MaskMatrix& mask, const VectorXd& targets,
                      const TreeParams& params, TreeTask task = TreeTask::classify,
                      const SigmaWeights* sigma = nullptr,
                      const std::vector<int>* samples = nullptr,
                      const VectorXd* sample_weight = nullptr);

}  // namespace ma
