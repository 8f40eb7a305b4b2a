#pragma once

#include "ma/common.hpp"
#include "ma/dataset.hpp"
#include "ma/model.hpp"

namespace ma {

/// Empirical missingness reliance of a model over a dataset. per_sample
/// holds the binary indicator per row; rho_hat is its mean;
/// per_feature_usage[j] estimates how often feature j takes part in a
/// prediction (decision-path membership for trees and ensembles, nonzero
/// coefficient for linear models).
struct RelianceReport {
  VectorXd per_sample;
  double rho_hat = 0;
  VectorXd per_feature_usage;
  Eigen::Index n = 0;
};

/// 1 iff some feature has a nonzero coefficient (beyond 1e-12) and is
/// missing. Observed values never matter: linear reliance is mask-and-
/// support only.
template <class DerivedX, class DerivedM>
int reliance_linear(const LinearModel& model, const Eigen::MatrixBase<DerivedX>& x,
                    const Eigen::MatrixBase<DerivedM>& m) {
  (void)x;
  if (m.size() != model.theta.size()) throw ContractError("reliance_linear: dimension mismatch");
  for (Eigen::Index j = 0; j < model.theta.size(); ++j)
    if (m[j] && std::abs(model.theta[j]) > kCoefficientZeroTol) return 1;
  return 0;
}

/// 1 iff a node on the decision path (walked on imputed values) splits on a
/// feature that is missing in the original mask row.
template <class DerivedX, class DerivedM>
int reliance_tree(const DecisionTree& tree, const Eigen::MatrixBase<DerivedX>& x,
                  const Eigen::MatrixBase<DerivedM>& m) {
  if (x.size() != m.size()) throw ContractError("reliance_tree: dimension mismatch");
  int u = tree.root;
  while (!tree.nodes[u].is_leaf()) {
    const auto& nd = tree.nodes[u];
    if (m[nd.feature]) return 1;
    u = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return 0;
}

/// Max over member trees.
template <class DerivedX, class DerivedM>
int reliance_ensemble(const Ensemble& ens, const Eigen::MatrixBase<DerivedX>& x,
                      const Eigen::MatrixBase<DerivedM>& m) {
  for (const auto& tree : ens.trees)
    if (reliance_tree(tree, x, m)) return 1;
  return 0;
}

RelianceReport empirical_reliance(const Model& model, const ImputedDataset& data);

/// Prop.-2-style lower bound on rho under independent MCAR masking:
/// max_j usage_j * p_j.
double mcar_bound(const RelianceReport& report, const VectorXd& rates);

}  // namespace ma
