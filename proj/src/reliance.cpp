#include "ma/reliance.hpp"

namespace ma {

namespace {

void mark_path_features(const DecisionTree& tree, const MatrixXd& x, Eigen::Index row,
                        std::vector<std::uint8_t>& used) {
  int u = tree.root;
  while (!tree.nodes[u].is_leaf()) {
    const auto& nd = tree.nodes[u];
    used[nd.feature] = 1;
    u = x(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
}

}  // namespace

RelianceReport empirical_reliance(const Model& model, const ImputedDataset& data) {
  const auto n = data.n();
  const auto d = data.d();
  RelianceReport report;
  report.n = n;
  report.per_sample = VectorXd::Zero(n);
  report.per_feature_usage = VectorXd::Zero(d);

  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    if (linear->theta.size() != d) throw ContractError("empirical_reliance: dimension mismatch");
    VectorXd support = VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < d; ++j)
      support[j] = std::abs(linear->theta[j]) > kCoefficientZeroTol ? 1.0 : 0.0;
    report.per_feature_usage = support;
    for (Eigen::Index i = 0; i < n; ++i)
      report.per_sample[i] =
          reliance_linear(*linear, data.x.row(i).transpose(), data.mask.row(i).transpose());
  } else {
    std::vector<const DecisionTree*> trees;
    if (const auto* tree = std::get_if<DecisionTree>(&model)) {
      trees.push_back(tree);
    } else {
      for (const auto& t : std::get<Ensemble>(model).trees) trees.push_back(&t);
    }
    for (const auto* t : trees)
      for (const auto& nd : t->nodes)
        if (!nd.is_leaf() && nd.feature >= d)
          throw ContractError("empirical_reliance: dimension mismatch");

    std::vector<std::uint8_t> used(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::fill(used.begin(), used.end(), 0);
      for (const auto* t : trees) mark_path_features(*t, data.x, i, used);
      int reliant = 0;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (!used[j]) continue;
        report.per_feature_usage[j] += 1.0;
        if (data.mask(i, j)) reliant = 1;
      }
      report.per_sample[i] = reliant;
    }
    report.per_feature_usage /= static_cast<double>(n);
  }

  report.rho_hat = report.per_sample.mean();
  return report;
}

double mcar_bound(const RelianceReport& report, const VectorXd& rates) {
  if (rates.size() != report.per_feature_usage.size())
    throw ContractError("mcar_bound: rate arity mismatch");
  for (Eigen::Index j = 0; j < rates.size(); ++j)
    if (rates[j] < 0 || rates[j] > 1) throw ConfigError("mcar_bound: rates must be in [0, 1]");
  double best = 0;
  for (Eigen::Index j = 0; j < rates.size(); ++j)
    best = std::max(best, report.per_feature_usage[j] * rates[j]);
  return best;
}

}  // namespace ma
