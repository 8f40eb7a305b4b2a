#pragma once

#include "ma/common.hpp"
#include "ma/dataset.hpp"
#include "ma/tree.hpp"

#include <vector>

namespace ma {

enum class EnsembleKind { forest, boosted };

/// Ordered tree ensemble. Forests average member leaf probabilities;
/// boosted ensembles accumulate margins: sigmoid(base_score + gamma * sum).
struct Ensemble {
  EnsembleKind kind = EnsembleKind::forest;
  std::vector<DecisionTree> trees;
  double base_score = 0;     // boosted: initial log-odds
  double learning_rate = 0;  // boosted only
  double feature_subsample = 0;  // forest only; <= 0 means sqrt(d) per node
  std::uint64_t seed = 0;

  template <class Derived>
  double predict(const Eigen::MatrixBase<Derived>& row) const {
    if (trees.empty()) throw ContractError("predict on empty ensemble");
    if (kind == EnsembleKind::forest) {
      double s = 0;
      for (const auto& t : trees) s += t.predict(row);
      return s / static_cast<double>(trees.size());
    }
    double margin = base_score;
    for (const auto& t : trees) margin += learning_rate * t.predict(row);
    return sigmoid(margin);
  }

  VectorXd predict(const MatrixXd& x) const;
};

struct ForestParams {
  int n_estimators = 50;
  int max_depth = 7;
  double alpha = 0.0;
  int min_samples_split = 2;
  double feature_subsample = 0;  // <= 0: ceil(sqrt(d)) features per node
  std::uint64_t seed = 0;
  bool bootstrap = true;  // test hook; resampling with replacement at full n
  int n_jobs = 1;
};

/// Independent MA trees on bootstrap resamples, sigma identically one.
/// Per-tree substreams make the result independent of n_jobs.
Ensemble fit_ma_rf(const ImputedDataset& data, const ForestParams& params);

/// Negative log-loss gradient with respect to the margins: y - sigmoid(margin).
VectorXd logloss_pseudo_residuals(const VectorXd& labels, const VectorXd& margins);

/// Zeroes sigma entries where the new tree's decision path for row i visits
/// feature j and that cell is missing; already-zero entries stay zero.
SigmaWeights update_sigma(const SigmaWeights& sigma, const DecisionTree& tree, const MatrixXd& x,
                          const MaskMatrix& mask);

struct BoostParams {
  int n_estimators = 10;
  double learning_rate = 0.1;
  double alpha = 0.0;
  int max_depth = 3;
  int min_samples_split = 2;
  std::uint64_t seed = 0;
};

/// Per-iteration state captured when a trace sink is passed to fit_ma_gbt.
struct BoostState {
  SigmaWeights sigma;
  VectorXd margins;
  int iteration = 0;
};

/// Stagewise boosting: squared-error MA regression trees on log-loss
/// pseudo-residuals, sigma updated after each stage so reliance already
/// incurred stops being penalized.
Ensemble fit_ma_gbt(const ImputedDataset& data, const BoostParams& params,
                    std::vector<BoostState>* trace = nullptr);

}  // namespace ma
