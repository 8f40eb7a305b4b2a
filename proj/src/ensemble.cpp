#include "ma/ensemble.hpp"

#include <cmath>
#include <future>

namespace ma {

VectorXd Ensemble::predict(const MatrixXd& x) const {
  VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i).transpose());
  return out;
}

Ensemble fit_ma_rf(const ImputedDataset& data, const ForestParams& params) {
  if (params.n_estimators < 1) throw ConfigError("fit_ma_rf: n_estimators must be at least 1");
  const auto n = data.n();

  Ensemble ens;
  ens.kind = EnsembleKind::forest;
  ens.feature_subsample = params.feature_subsample;
  ens.seed = params.seed;
  ens.trees.resize(params.n_estimators);

  SigmaWeights ones = SigmaWeights::Ones(data.mask.rows(), data.mask.cols());

  auto fit_one = [&](int t) {
    auto rng = substream(params.seed, static_cast<std::uint64_t>(t));
    std::vector<int> samples;
    if (params.bootstrap) {
      samples.resize(n);
      std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
      for (auto& s : samples) s = pick(rng);
    }
    TreeParams tp;
    tp.alpha = params.alpha;
    tp.max_depth = params.max_depth;
    tp.min_samples_split = params.min_samples_split;
    tp.feature_subsample = params.feature_subsample;
    // Per-node feature draws come from the tree's own substream.
    std::uniform_int_distribution<std::uint64_t> any;
    tp.seed = any(rng);
    ens.trees[t] = fit_tree(data.x, data.mask, data.labels, tp, TreeTask::classify, &ones,
                            params.bootstrap ? &samples : nullptr, nullptr);
  };

  const int jobs = std::max(1, params.n_jobs);
  if (jobs == 1) {
    for (int t = 0; t < params.n_estimators; ++t) fit_one(t);
  } else {
    std::vector<std::future<void>> tasks;
    for (int w = 0; w < jobs; ++w) {
      tasks.push_back(std::async(std::launch::async, [&, w] {
        for (int t = w; t < params.n_estimators; t += jobs) fit_one(t);
      }));
    }
    for (auto& task : tasks) task.get();
  }
  return ens;
}

VectorXd logloss_pseudo_residuals(const VectorXd& labels, const VectorXd& margins) {
  if (labels.size() != margins.size())
    throw ContractError("logloss_pseudo_residuals: length mismatch");
  if (!margins.allFinite()) throw ContractError("logloss_pseudo_residuals: non-finite margins");
  return labels.array() - sigmoid(margins.array());
}

SigmaWeights update_sigma(const SigmaWeights& sigma, const DecisionTree& tree, const MatrixXd& x,
                          const MaskMatrix& mask) {
  if (sigma.rows() != x.rows() || sigma.cols() != x.cols() || mask.rows() != x.rows() ||
      mask.cols() != x.cols())
    throw ContractError("update_sigma: shape mismatch");
  SigmaWeights out = sigma;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto path = tree.decision_path(x.row(i).transpose());
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const int j = tree.nodes[path[k]].feature;
      if (mask(i, j)) out(i, j) = 0;
    }
  }
  return out;
}

Ensemble fit_ma_gbt(const ImputedDataset& data, const BoostParams& params,
                    std::vector<BoostState>* trace) {
  if (params.n_estimators < 1) throw ConfigError("fit_ma_gbt: n_estimators must be at least 1");
  if (params.learning_rate < 0) throw ConfigError("fit_ma_gbt: learning_rate must be nonnegative");
  const auto n = data.n();
  const double base_rate = data.labels.mean();
  if (base_rate <= 0.0 || base_rate >= 1.0)
    throw ContractError("fit_ma_gbt: degenerate base rate, both classes required");

  Ensemble ens;
  ens.kind = EnsembleKind::boosted;
  ens.learning_rate = params.learning_rate;
  ens.seed = params.seed;
  ens.base_score = std::log(base_rate / (1.0 - base_rate));

  SigmaWeights sigma = SigmaWeights::Ones(data.mask.rows(), data.mask.cols());
  VectorXd margins = VectorXd::Constant(n, ens.base_score);

  for (int m = 0; m < params.n_estimators; ++m) {
    const VectorXd residuals = logloss_pseudo_residuals(data.labels, margins);

    TreeParams tp;
    tp.alpha = params.alpha;
    tp.max_depth = params.max_depth;
    tp.min_samples_split = params.min_samples_split;
    tp.seed = params.seed;
    auto tree = fit_tree(data.x, data.mask, residuals, tp, TreeTask::regress, &sigma);

    for (Eigen::Index i = 0; i < n; ++i)
      margins[i] += params.learning_rate * tree.predict(data.x.row(i).transpose());
    // Paths recomputed on the original imputed rows, matching the update rule.
    sigma = update_sigma(sigma, tree, data.x, data.mask);
    ens.trees.push_back(std::move(tree));

    if (trace) trace->push_back({sigma, margins, m + 1});
  }
  return ens;
}

}  // namespace ma
