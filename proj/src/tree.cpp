#include "ma/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ma {

VectorXd DecisionTree::predict(const MatrixXd& x) const {
  VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i).transpose());
  return out;
}

int DecisionTree::depth() const {
  int best = 0;
  std::vector<std::pair<int, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto [u, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[u].is_leaf()) {
      stack.push_back({nodes[u].left, d + 1});
      stack.push_back({nodes[u].right, d + 1});
    }
  }
  return best;
}

int DecisionTree::leaf_count() const {
  int c = 0;
  for (const auto& nd : nodes) c += nd.is_leaf() ? 1 : 0;
  return c;
}

double gini(double count0, double count1) {
  const double total = count0 + count1;
  if (total <= 0) throw ContractError("gini: empty class counts");
  const double p0 = count0 / total;
  const double p1 = count1 / total;
  return p0 * (1.0 - p0) + p1 * (1.0 - p1);
}

double split_penalty(const std::vector<int>& node_samples, int feature, const MaskMatrix& mask,
                     const SigmaWeights* sigma) {
  if (node_samples.empty()) throw ContractError("split_penalty: empty node");
  double missing = 0;
  for (int i : node_samples) {
    if (mask(i, feature) && (!sigma || (*sigma)(i, feature))) missing += 1.0;
  }
  return missing / static_cast<double>(node_samples.size());
}

namespace {

struct NodeStats {
  double weight = 0;
  double count1 = 0;   // classify: weighted positive count
  double sum = 0;      // regress: weighted target sum
  double sumsq = 0;    // regress: weighted squared target sum
};

NodeStats accumulate(const VectorXd& targets, const std::vector<int>& samples,
                     const VectorXd* w) {
  NodeStats s;
  for (int i : samples) {
    const double wi = w ? (*w)[i] : 1.0;
    s.weight += wi;
    s.count1 += wi * targets[i];
    s.sum += wi * targets[i];
    s.sumsq += wi * targets[i] * targets[i];
  }
  return s;
}

double node_criterion(const NodeStats& s, TreeTask task) {
  if (s.weight <= 0) throw ContractError("criterion of empty node");
  if (task == TreeTask::classify) return gini(s.weight - s.count1, s.count1);
  const double mean = s.sum / s.weight;
  double mse = s.sumsq / s.weight - mean * mean;
  return mse > 0 ? mse : 0.0;
}

}  // namespace

std::optional<Split> best_split(const MatrixXd& x, const MaskMatrix& mask,
                                const VectorXd& targets, const std::vector<int>& node_samples,
                                const TreeParams& params, TreeTask task,
                                const SigmaWeights* sigma,
                                const std::vector<int>& feature_subset,
                                const VectorXd* sample_weight) {
  const auto parent = accumulate(targets, node_samples, sample_weight);
  const double parent_criterion = node_criterion(parent, task);

  std::optional<Split> best;
  std::vector<std::pair<double, int>> order;  // (value, sample index)
  order.reserve(node_samples.size());

  for (int j : feature_subset) {
    const double penalty = split_penalty(node_samples, j, mask, sigma);

    order.clear();
    for (int i : node_samples) order.emplace_back(x(i, j), i);
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    NodeStats left;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const int i = order[k].second;
      const double wi = sample_weight ? (*sample_weight)[i] : 1.0;
      left.weight += wi;
      left.count1 += wi * targets[i];
      left.sum += wi * targets[i];
      left.sumsq += wi * targets[i] * targets[i];
      if (order[k].first == order[k + 1].first) continue;

      NodeStats right;
      right.weight = parent.weight - left.weight;
      right.count1 = parent.count1 - left.count1;
      right.sum = parent.sum - left.sum;
      right.sumsq = parent.sumsq - left.sumsq;
      if (left.weight <= 0 || right.weight <= 0) continue;

      double child;
      if (task == TreeTask::classify) {
        child = (left.weight * gini(left.weight - left.count1, left.count1) +
                 right.weight * gini(right.weight - right.count1, right.count1)) /
                parent.weight;
      } else {
        const double lmean = left.sum / left.weight;
        const double rmean = right.sum / right.weight;
        const double lsse = left.sumsq - left.sum * lmean;
        const double rsse = right.sumsq - right.sum * rmean;
        child = (lsse + rsse) / parent.weight;
      }
      const double total = child + params.alpha * penalty;
      if (!best || total < best->score) {
        const double tau = 0.5 * (order[k].first + order[k + 1].first);
        best = Split{j, tau, total, penalty, parent_criterion - total};
      }
    }
  }

  if (!best) return std::nullopt;
  if (best->gain < params.min_impurity_decrease) return std::nullopt;
  return best;
}

namespace {

struct TreeBuilder {
  const MatrixXd& x;
  const MaskMatrix& mask;
  const VectorXd& targets;
  const TreeParams& params;
  TreeTask task;
  const SigmaWeights* sigma;
  const VectorXd* weight;
  std::mt19937_64 rng;
  int subset_size;
  std::vector<TreeNode> nodes;

  std::vector<int> pick_features() {
    const int d = static_cast<int>(x.cols());
    if (subset_size >= d) {
      std::vector<int> all(d);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < subset_size; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(subset_size);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  bool pure(const std::vector<int>& samples) const {
    const double first = targets[samples.front()];
    for (int i : samples)
      if (targets[i] != first) return false;
    return true;
  }

  int build(std::vector<int>& samples, int depth) {
    const auto stats = accumulate(targets, samples, weight);
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[id].count = static_cast<int>(samples.size());
    nodes[id].value = task == TreeTask::classify ? stats.count1 / stats.weight
                                                 : stats.sum / stats.weight;

    if (depth >= params.max_depth ||
        static_cast<int>(samples.size()) < params.min_samples_split || pure(samples))
      return id;

    const auto subset = pick_features();
    const auto split = best_split(x, mask, targets, samples, params, task, sigma, subset, weight);
    if (!split) return id;

    std::vector<int> left, right;
    for (int i : samples) (x(i, split->feature) <= split->threshold ? left : right).push_back(i);
    samples.clear();
    samples.shrink_to_fit();

    nodes[id].feature = split->feature;
    nodes[id].threshold = split->threshold;
    nodes[id].left = build(left, depth + 1);
    nodes[id].right = build(right, depth + 1);
    return id;
  }
};

}  // namespace

DecisionTree fit_tree(const MatrixXd& x, const MaskMatrix& mask, const VectorXd& targets,
                      const TreeParams& params, TreeTask task, const SigmaWeights* sigma,
                      const std::vector<int>* samples, const VectorXd* sample_weight) {
  if (x.rows() == 0 || x.cols() == 0) throw ContractError("fit_tree: empty data");
  if (x.rows() != targets.size() || x.rows() != mask.rows() || x.cols() != mask.cols())
    throw ContractError("fit_tree: shape mismatch");
  if (sigma && (sigma->rows() != x.rows() || sigma->cols() != x.cols()))
    throw ContractError("fit_tree: sigma shape mismatch");
  if (params.max_depth < 1) throw ConfigError("fit_tree: max_depth must be at least 1");
  if (params.min_samples_split < 2)
    throw ConfigError("fit_tree: min_samples_split must be at least 2");
  if (params.alpha < 0) throw ConfigError("fit_tree: alpha must be nonnegative");
  if (task == TreeTask::classify) {
    for (Eigen::Index i = 0; i < targets.size(); ++i)
      if (targets[i] != 0.0 && targets[i] != 1.0)
        throw ContractError("fit_tree: classification targets must be binary");
  }

  const int d = static_cast<int>(x.cols());
  int subset_size;
  if (params.feature_subsample > 0)
    subset_size = static_cast<int>(std::ceil(params.feature_subsample * d));
  else
    subset_size = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  subset_size = std::clamp(subset_size, 1, d);

  std::vector<int> all;
  if (samples) {
    all = *samples;
    if (all.empty()) throw ContractError("fit_tree: empty sample set");
  } else {
    all.resize(x.rows());
    std::iota(all.begin(), all.end(), 0);
  }

  TreeBuilder builder{x,     mask,  targets, params, task, sigma, sample_weight,
                      make_rng(params.seed), subset_size, {}};
  builder.build(all, 0);

  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  tree.root = 0;
  tree.params = params;
  tree.task = task;
  return tree;
}

}  // namespace ma
