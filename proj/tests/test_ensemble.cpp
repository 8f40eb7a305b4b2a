#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ma/ensemble.hpp"
#include "ma/eval.hpp"
#include "ma/reliance.hpp"

using namespace ma;

namespace {

ImputedDataset synthetic(std::mt19937_64& rng, int n, int d, double missing_rate) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  ImputedDataset data;
  data.x.resize(n, d);
  data.mask.resize(n, d);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    double margin = 0;
    for (int j = 0; j < d; ++j) {
      const double v = g(rng);
      const bool missing = u(rng) < missing_rate;
      data.mask(i, j) = missing ? 1 : 0;
      data.x(i, j) = missing ? 0.0 : v;  // zero-imputed
      margin += 1.2 * v;
    }
    data.labels[i] = u(rng) < sigmoid(margin) ? 1.0 : 0.0;
  }
  data.labels[0] = 0;
  data.labels[n - 1] = 1;
  return data;
}

double train_logloss(const VectorXd& y, const VectorXd& margins) {
  double total = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = sigmoid(margins[i]);
    total -= y[i] * std::log(p) + (1 - y[i]) * std::log(1 - p);
  }
  return total / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("a degenerate forest equals a single fitted tree") {
  auto rng = make_rng(1);
  const auto data = synthetic(rng, 80, 3, 0.2);
  ForestParams fp;
  fp.n_estimators = 1;
  fp.feature_subsample = 1.0;
  fp.bootstrap = false;
  fp.alpha = 0.1;
  fp.max_depth = 4;
  const auto forest = fit_ma_rf(data, fp);

  TreeParams tp;
  tp.alpha = 0.1;
  tp.max_depth = 4;
  tp.feature_subsample = 1.0;
  SigmaWeights ones = SigmaWeights::Ones(80, 3);
  const auto tree = fit_tree(data.x, data.mask, data.labels, tp, TreeTask::classify, &ones);

  REQUIRE(forest.trees.size() == 1);
  REQUIRE(forest.trees[0].nodes.size() == tree.nodes.size());
  for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
    CHECK(forest.trees[0].nodes[u].feature == tree.nodes[u].feature);
    CHECK(forest.trees[0].nodes[u].threshold == tree.nodes[u].threshold);
    CHECK(forest.trees[0].nodes[u].value == tree.nodes[u].value);
  }
}

TEST_CASE("different seeds draw different bootstrap resamples") {
  auto rng = make_rng(2);
  const auto data = synthetic(rng, 100, 3, 0.1);
  ForestParams fp;
  fp.n_estimators = 3;
  fp.max_depth = 3;
  fp.seed = 1;
  const auto a = fit_ma_rf(data, fp);
  fp.seed = 2;
  const auto b = fit_ma_rf(data, fp);

  bool any_difference = false;
  for (std::size_t t = 0; t < a.trees.size() && !any_difference; ++t) {
    if (a.trees[t].nodes.size() != b.trees[t].nodes.size()) {
      any_difference = true;
      break;
    }
    for (std::size_t u = 0; u < a.trees[t].nodes.size(); ++u) {
      if (a.trees[t].nodes[u].threshold != b.trees[t].nodes[u].threshold ||
          a.trees[t].nodes[u].feature != b.trees[t].nodes[u].feature) {
        any_difference = true;
        break;
      }
    }
  }
  CHECK(any_difference);
}

TEST_CASE("forests are reproducible and independent of the job count") {
  auto rng = make_rng(3);
  const auto data = synthetic(rng, 120, 4, 0.25);
  ForestParams fp;
  fp.n_estimators = 8;
  fp.max_depth = 4;
  fp.seed = 42;
  fp.alpha = 0.1;
  const auto a = fit_ma_rf(data, fp);
  const auto b = fit_ma_rf(data, fp);
  fp.n_jobs = 3;
  const auto c = fit_ma_rf(data, fp);

  for (const auto* other : {&b, &c}) {
    REQUIRE(other->trees.size() == a.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
      REQUIRE(other->trees[t].nodes.size() == a.trees[t].nodes.size());
      for (std::size_t u = 0; u < a.trees[t].nodes.size(); ++u) {
        CHECK(other->trees[t].nodes[u].feature == a.trees[t].nodes[u].feature);
        CHECK(other->trees[t].nodes[u].threshold == a.trees[t].nodes[u].threshold);
        CHECK(other->trees[t].nodes[u].value == a.trees[t].nodes[u].value);
      }
    }
  }
}

TEST_CASE("pseudo-residuals are the negative log-loss gradient") {
  VectorXd y(1), m(1);
  y << 1;
  m << 0;
  CHECK(logloss_pseudo_residuals(y, m)[0] == doctest::Approx(0.5));

  y << 0;
  m << 20;
  CHECK(logloss_pseudo_residuals(y, m)[0] == doctest::Approx(-1.0).epsilon(1e-8));

  auto rng = make_rng(4);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd yy(1), mm(1);
    yy << (u(rng) < 0.5 ? 0.0 : 1.0);
    mm << 2.0 * g(rng);
    const double r = logloss_pseudo_residuals(yy, mm)[0];
    const double eps = 1e-6;
    VectorXd hi(1), lo(1);
    hi << mm[0] + eps;
    lo << mm[0] - eps;
    const double fd = (train_logloss(yy, hi) - train_logloss(yy, lo)) / (2 * eps);
    CHECK(r == doctest::Approx(-fd).epsilon(1e-6));
  }
}

TEST_CASE("update_sigma flips exactly the traced missing cells") {
  DecisionTree stump;
  stump.nodes.push_back({0, 0.5, 1, 2, 0.0, 2});
  stump.nodes.push_back({-1, 0, -1, -1, 0.0, 1});
  stump.nodes.push_back({-1, 0, -1, -1, 1.0, 1});

  MatrixXd x(2, 2);
  x << 0, 3, 1, 4;
  MaskMatrix mask = MaskMatrix::Zero(2, 2);
  mask(0, 0) = 1;
  SigmaWeights sigma = SigmaWeights::Ones(2, 2);
  const auto updated = update_sigma(sigma, stump, x, mask);
  CHECK(updated(0, 0) == 0);
  CHECK(updated(0, 1) == 1);
  CHECK(updated(1, 0) == 1);
  CHECK(updated(1, 1) == 1);

  DecisionTree leaf;
  leaf.nodes.push_back({-1, 0, -1, -1, 0.5, 2});
  const auto unchanged = update_sigma(sigma, leaf, x, mask);
  CHECK((unchanged.array() == sigma.array()).all());
}

TEST_CASE("update_sigma matches a hand-traced depth-2 example") {
  DecisionTree tree;
  tree.nodes.push_back({0, 0.5, 1, 2, 0.0, 6});   // 0: x0 <= 0.5
  tree.nodes.push_back({1, 0.5, 3, 4, 0.0, 4});   // 1: x1 <= 0.5
  tree.nodes.push_back({-1, 0, -1, -1, 0.5, 2});  // 2: leaf
  tree.nodes.push_back({-1, 0, -1, -1, 0.0, 2});  // 3: leaf
  tree.nodes.push_back({-1, 0, -1, -1, 1.0, 2});  // 4: leaf

  MatrixXd x(6, 2);
  x << 0, 0,
       0, 1,
       1, 0,
       0, 0,
       1, 1,
       0, 1;
  MaskMatrix mask(6, 2);
  mask << 1, 0,
          0, 1,
          1, 1,
          0, 0,
          0, 1,
          1, 0;
  const auto updated = update_sigma(SigmaWeights::Ones(6, 2), tree, x, mask);

  MaskMatrix expected = MaskMatrix::Ones(6, 2);
  expected(0, 0) = 0;  // row 0 path visits x0 (missing) and x1 (observed)
  expected(1, 1) = 0;  // row 1 path visits x0 (observed) and x1 (missing)
  expected(2, 0) = 0;  // row 2 goes right at the root; x1 never visited
  expected(5, 0) = 0;  // row 5 path visits x0 (missing)
  CHECK((updated.array() == expected.array()).all());
}

TEST_CASE("one-round boosting with unit learning rate matches hand computation") {
  MatrixXd x(6, 1);
  x << 0, 1, 2, 10, 11, 12;
  VectorXd y(6);
  y << 0, 0, 0, 1, 1, 1;
  ImputedDataset data{x, MaskMatrix::Zero(6, 1), y, {"f0"}, {}};

  BoostParams bp;
  bp.n_estimators = 1;
  bp.learning_rate = 1.0;
  bp.max_depth = 1;
  const auto ens = fit_ma_gbt(data, bp);
  CHECK(ens.base_score == doctest::Approx(0.0));  // log-odds of 0.5
  // residuals are +-0.5; stump leaves hold their means
  VectorXd low(1), high(1);
  low << 1.0;
  high << 11.0;
  CHECK(ens.predict(low) == doctest::Approx(sigmoid(-0.5)));
  CHECK(ens.predict(high) == doctest::Approx(sigmoid(0.5)));
}

TEST_CASE("zero learning rate predicts the base rate everywhere") {
  auto rng = make_rng(5);
  const auto data = synthetic(rng, 60, 2, 0.2);
  BoostParams bp;
  bp.n_estimators = 4;
  bp.learning_rate = 0.0;
  const auto ens = fit_ma_gbt(data, bp);
  const double expected = sigmoid(ens.base_score);
  for (int i = 0; i < 10; ++i)
    CHECK(ens.predict(data.x.row(i).transpose()) == doctest::Approx(expected));
}

TEST_CASE("boosting mechanics: sigma monotone, justified, loss non-increasing") {
  auto rng = make_rng(6);
  const auto data = synthetic(rng, 200, 4, 0.3);
  BoostParams bp;
  bp.n_estimators = 10;
  bp.learning_rate = 0.1;
  bp.alpha = 0.05;
  bp.max_depth = 3;
  std::vector<BoostState> trace;
  const auto ens = fit_ma_gbt(data, bp, &trace);
  REQUIRE(trace.size() == 10);

  SigmaWeights prev = SigmaWeights::Ones(200, 4);
  VectorXd margins = VectorXd::Constant(200, ens.base_score);
  double prev_loss = train_logloss(data.labels, margins);
  for (std::size_t m = 0; m < trace.size(); ++m) {
    const auto& state = trace[m];
    // entrywise non-increasing, and every flip justified by a traced path
    // through a missing cell
    for (int i = 0; i < 200; ++i) {
      for (int j = 0; j < 4; ++j) {
        CHECK(state.sigma(i, j) <= prev(i, j));
        if (prev(i, j) == 1 && state.sigma(i, j) == 0) {
          const auto path = ens.trees[m].decision_path(data.x.row(i).transpose());
          bool on_path = false;
          for (std::size_t k = 0; k + 1 < path.size(); ++k)
            if (ens.trees[m].nodes[path[k]].feature == j) on_path = true;
          CHECK(on_path);
          CHECK(data.mask(i, j) == 1);
        }
      }
    }
    prev = state.sigma;

    const double loss = train_logloss(data.labels, state.margins);
    CHECK(loss <= prev_loss + 1e-12);
    prev_loss = loss;
  }
}

TEST_CASE("ensemble predictions follow the combination rules") {
  DecisionTree t1, t2;
  t1.nodes.push_back({-1, 0, -1, -1, 0.2, 1});
  t2.nodes.push_back({-1, 0, -1, -1, 0.8, 1});

  Ensemble forest;
  forest.kind = EnsembleKind::forest;
  forest.trees = {t1, t2};
  VectorXd row(1);
  row << 0.0;
  CHECK(forest.predict(row) == doctest::Approx(0.5));

  Ensemble single;
  single.kind = EnsembleKind::forest;
  single.trees = {t1, t1, t1};
  CHECK(single.predict(row) == doctest::Approx(0.2));

  Ensemble empty;
  CHECK_THROWS_AS(empty.predict(row), ContractError);

  Ensemble boosted;
  boosted.kind = EnsembleKind::boosted;
  boosted.base_score = 0.7;
  boosted.learning_rate = 0.1;
  DecisionTree zero;
  zero.nodes.push_back({-1, 0, -1, -1, 0.0, 1});
  boosted.trees = {zero, zero};
  CHECK(boosted.predict(row) == doctest::Approx(sigmoid(0.7)));
}

TEST_CASE("ensemble reliance is non-decreasing in ensemble size") {
  auto rng = make_rng(8);
  const auto data = synthetic(rng, 150, 4, 0.3);

  ForestParams fp;
  fp.n_estimators = 10;
  fp.max_depth = 3;
  fp.seed = 9;
  const auto forest = fit_ma_rf(data, fp);

  BoostParams bp;
  bp.n_estimators = 10;
  bp.max_depth = 3;
  const auto boosted = fit_ma_gbt(data, bp);

  for (const auto* ens : {&forest, &boosted}) {
    double prev = 0;
    for (std::size_t m = 1; m <= ens->trees.size(); ++m) {
      Ensemble prefix = *ens;
      prefix.trees.assign(ens->trees.begin(), ens->trees.begin() + m);
      const double rho = empirical_reliance(Model{prefix}, data).rho_hat;
      CHECK(rho >= prev - 1e-15);
      prev = rho;
    }
  }
}

TEST_CASE("degenerate base rates are rejected") {
  MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  ImputedDataset data{x, MaskMatrix::Zero(4, 1), VectorXd::Ones(4), {}, {}};
  CHECK_THROWS_AS(fit_ma_gbt(data, BoostParams{}), ContractError);
}
