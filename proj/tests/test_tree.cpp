#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ma/tree.hpp"
#include "oracles.hpp"

#include <numeric>

using namespace ma;

namespace {

std::vector<int> all_rows(Eigen::Index n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

std::vector<int> all_features(Eigen::Index d) {
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

struct RandomInstance {
  MatrixXd x;
  MaskMatrix mask;
  VectorXd y;
};

RandomInstance random_instance(std::mt19937_64& rng, int n, int d, double missing_rate) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  RandomInstance inst;
  inst.x.resize(n, d);
  inst.mask.resize(n, d);
  inst.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      inst.x(i, j) = g(rng);
      inst.mask(i, j) = u(rng) < missing_rate ? 1 : 0;
    }
    inst.y[i] = u(rng) < 0.5 ? 1.0 : 0.0;
  }
  // ensure both classes
  inst.y[0] = 0.0;
  inst.y[n - 1] = 1.0;
  return inst;
}

}  // namespace

TEST_CASE("gini matches the class-fraction formula") {
  CHECK(gini(5, 5) == doctest::Approx(0.5));
  CHECK(gini(10, 0) == doctest::Approx(0.0));
  CHECK(gini(3, 1) == doctest::Approx(0.375));
  CHECK_THROWS_AS(gini(0, 0), ContractError);
}

TEST_CASE("split_penalty counts sigma-weighted missing cells") {
  MaskMatrix mask(4, 1);
  mask << 0, 0, 1, 1;
  const auto samples = all_rows(4);
  MaskMatrix none = MaskMatrix::Zero(4, 1);
  CHECK(split_penalty(samples, 0, none, nullptr) == doctest::Approx(0.0));
  CHECK(split_penalty(samples, 0, MaskMatrix::Ones(4, 1), nullptr) == doctest::Approx(1.0));

  SigmaWeights sigma = SigmaWeights::Ones(4, 1);
  sigma(2, 0) = 0;  // one of the two missing rows is exempt
  CHECK(split_penalty(samples, 0, mask, &sigma) == doctest::Approx(0.25));
}

TEST_CASE("best_split finds the unique separating midpoint") {
  MatrixXd x(2, 1);
  x << 0, 1;
  VectorXd y(2);
  y << 0, 1;
  MaskMatrix mask = MaskMatrix::Zero(2, 1);
  TreeParams params;
  const auto split = best_split(x, mask, y, all_rows(2), params, TreeTask::classify, nullptr,
                                all_features(1), nullptr);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
  CHECK(split->threshold == doctest::Approx(0.5));
}

TEST_CASE("a large penalty steers the split to the complete feature") {
  const int n = 8;
  MatrixXd x(n, 2);
  MaskMatrix mask = MaskMatrix::Zero(n, 2);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double label = i < n / 2 ? 0.0 : 1.0;
    x(i, 0) = label;  // both features separate perfectly
    x(i, 1) = label;
    y[i] = label;
    if (i % 2 == 0) mask(i, 0) = 1;  // feature 0 missing for half the node
  }
  TreeParams params;
  params.alpha = 100.0;
  const auto split = best_split(x, mask, y, all_rows(n), params, TreeTask::classify, nullptr,
                                all_features(2), nullptr);
  REQUIRE(split.has_value());
  CHECK(split->feature == 1);
}

TEST_CASE("best_split equals exhaustive enumeration on random nodes") {
  auto rng = make_rng(101);
  std::uniform_int_distribution<int> n_dist(4, 32), d_dist(1, 4);
  const double alphas[] = {0.0, 0.1, 1.0};
  for (int trial = 0; trial < 100; ++trial) {
    const int n = n_dist(rng), d = d_dist(rng);
    auto inst = random_instance(rng, n, d, 0.3);
    const double alpha = alphas[trial % 3];
    TreeParams params;
    params.alpha = alpha;
    const auto got = best_split(inst.x, inst.mask, inst.y, all_rows(n), params,
                                TreeTask::classify, nullptr, all_features(d), nullptr);
    const auto want =
        oracle::best_split_exhaustive(inst.x, inst.mask, inst.y, all_rows(n), alpha, 0.0);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->feature == want->feature);
      CHECK(got->threshold == want->threshold);
      CHECK(got->score == doctest::Approx(want->score).epsilon(1e-12));
    }
  }
}

TEST_CASE("fit_tree collapses pure data to a single leaf") {
  MatrixXd x(4, 2);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  VectorXd y = VectorXd::Ones(4);
  MaskMatrix mask = MaskMatrix::Zero(4, 2);
  const auto tree = fit_tree(x, mask, y, TreeParams{});
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].value == 1.0);
}

TEST_CASE("max_depth one yields a stump on separable data") {
  MatrixXd x(6, 1);
  x << 0, 1, 2, 10, 11, 12;
  VectorXd y(6);
  y << 0, 0, 0, 1, 1, 1;
  MaskMatrix mask = MaskMatrix::Zero(6, 1);
  TreeParams params;
  params.max_depth = 1;
  const auto tree = fit_tree(x, mask, y, params);
  CHECK(tree.nodes.size() == 3);
  CHECK(tree.depth() == 1);
  CHECK(tree.nodes[tree.root].threshold == doctest::Approx(6.0));

  // routing rule: x <= tau goes left, x > tau goes right
  VectorXd row(1);
  row << 0.7;
  MatrixXd stump_x(2, 1);
  stump_x << 0, 1;
  VectorXd stump_y(2);
  stump_y << 0, 1;
  const auto stump = fit_tree(stump_x, MaskMatrix::Zero(2, 1), stump_y, params);
  const auto path = stump.decision_path(row);
  CHECK(path.back() == stump.nodes[stump.root].right);
  CHECK(stump.predict(row) == 1.0);
}

TEST_CASE("alpha zero reproduces the reference CART on random instances") {
  auto rng = make_rng(202);
  std::uniform_int_distribution<int> n_dist(6, 50), d_dist(1, 5), depth_dist(1, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = n_dist(rng), d = d_dist(rng), depth = depth_dist(rng);
    auto inst = random_instance(rng, n, d, 0.3);
    TreeParams params;
    params.alpha = 0.0;
    params.max_depth = depth;
    const auto tree = fit_tree(inst.x, inst.mask, inst.y, params);
    const auto ref = oracle::cart_fit(inst.x, inst.y, depth);

    REQUIRE(tree.nodes.size() == ref.nodes.size());
    for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
      CHECK(tree.nodes[u].feature == ref.nodes[u].feature);
      CHECK(tree.nodes[u].left == ref.nodes[u].left);
      CHECK(tree.nodes[u].right == ref.nodes[u].right);
      if (tree.nodes[u].is_leaf())
        CHECK(tree.nodes[u].value == doctest::Approx(ref.nodes[u].value).epsilon(1e-12));
      else
        CHECK(tree.nodes[u].threshold == ref.nodes[u].threshold);
    }
  }
}

TEST_CASE("decision paths match hand-traced sequences on a built tree") {
  DecisionTree tree;
  tree.nodes.push_back({0, 0.5, 1, 2, 0.0, 10});   // 0: x0 <= 0.5
  tree.nodes.push_back({1, 0.0, 3, 4, 0.0, 6});    // 1: x1 <= 0
  tree.nodes.push_back({-1, 0, -1, -1, 0.9, 4});   // 2: leaf
  tree.nodes.push_back({-1, 0, -1, -1, 0.1, 3});   // 3: leaf
  tree.nodes.push_back({2, 1.5, 5, 6, 0.0, 3});    // 4: x2 <= 1.5
  tree.nodes.push_back({-1, 0, -1, -1, 0.2, 2});   // 5: leaf
  tree.nodes.push_back({-1, 0, -1, -1, 0.8, 1});   // 6: leaf

  MatrixXd rows(5, 3);
  rows << 0.3, -1.0, 0.0,
          0.3,  0.5, 1.0,
          0.3,  0.5, 2.0,
          0.7,  9.0, 9.0,
          0.5,  0.0, 1.5;
  const std::vector<std::vector<int>> expected = {
      {0, 1, 3}, {0, 1, 4, 5}, {0, 1, 4, 6}, {0, 2}, {0, 1, 3}};
  const std::vector<double> values = {0.1, 0.2, 0.8, 0.9, 0.1};
  for (int i = 0; i < 5; ++i) {
    CHECK(tree.decision_path(rows.row(i).transpose()) == expected[i]);
    CHECK(tree.predict(rows.row(i).transpose()) == values[i]);
  }

  DecisionTree leaf_only;
  leaf_only.nodes.push_back({-1, 0, -1, -1, 0.25, 7});
  VectorXd any(3);
  any << 1, 2, 3;
  CHECK(leaf_only.decision_path(any) == std::vector<int>{0});
  CHECK(leaf_only.predict(any) == 0.25);
}

TEST_CASE("chosen-split penalty is non-increasing in alpha") {
  auto rng = make_rng(303);
  const double alphas[] = {0.0, 0.05, 0.1, 0.5, 1.0, 5.0};
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = random_instance(rng, 24, 4, 0.35);
    double prev_penalty = std::numeric_limits<double>::infinity();
    bool first = true;
    for (const double alpha : alphas) {
      TreeParams params;
      params.alpha = alpha;
      const auto split = best_split(inst.x, inst.mask, inst.y, all_rows(24), params,
                                    TreeTask::classify, nullptr, all_features(4), nullptr);
      if (!split) break;
      if (!first) CHECK(split->penalty <= prev_penalty + 1e-12);
      prev_penalty = split->penalty;
      first = false;
    }
  }
}

TEST_CASE("identical inputs produce bit-identical trees") {
  auto rng = make_rng(404);
  auto inst = random_instance(rng, 40, 3, 0.2);
  TreeParams params;
  params.alpha = 0.1;
  params.max_depth = 5;
  const auto a = fit_tree(inst.x, inst.mask, inst.y, params);
  const auto b = fit_tree(inst.x, inst.mask, inst.y, params);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t u = 0; u < a.nodes.size(); ++u) {
    CHECK(a.nodes[u].feature == b.nodes[u].feature);
    CHECK(a.nodes[u].threshold == b.nodes[u].threshold);
    CHECK(a.nodes[u].value == b.nodes[u].value);
    CHECK(a.nodes[u].count == b.nodes[u].count);
  }
}

TEST_CASE("leaf counts partition the samples and values are class fractions") {
  auto rng = make_rng(505);
  auto inst = random_instance(rng, 64, 3, 0.25);
  TreeParams params;
  params.max_depth = 4;
  params.alpha = 0.1;
  const auto tree = fit_tree(inst.x, inst.mask, inst.y, params);

  int total = 0;
  for (const auto& nd : tree.nodes)
    if (nd.is_leaf()) total += nd.count;
  CHECK(total == 64);

  // recompute each leaf's positive fraction by routing every row
  std::vector<double> pos(tree.nodes.size(), 0), cnt(tree.nodes.size(), 0);
  for (int i = 0; i < 64; ++i) {
    const int leaf = tree.leaf_for(inst.x.row(i).transpose());
    pos[leaf] += inst.y[i];
    cnt[leaf] += 1;
  }
  for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
    if (!tree.nodes[u].is_leaf()) continue;
    REQUIRE(cnt[u] == tree.nodes[u].count);
    CHECK(std::abs(tree.nodes[u].value - pos[u] / cnt[u]) < 1e-12);
  }
}

TEST_CASE("regression trees fit means under the squared-error criterion") {
  MatrixXd x(6, 1);
  x << 0, 1, 2, 10, 11, 12;
  VectorXd targets(6);
  targets << 0.1, 0.2, 0.3, 1.1, 1.2, 1.3;
  MaskMatrix mask = MaskMatrix::Zero(6, 1);
  TreeParams params;
  params.max_depth = 1;
  const auto tree = fit_tree(x, mask, targets, params, TreeTask::regress);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[tree.root].threshold == doctest::Approx(6.0));
  CHECK(tree.nodes[tree.nodes[tree.root].left].value == doctest::Approx(0.2));
  CHECK(tree.nodes[tree.nodes[tree.root].right].value == doctest::Approx(1.2));
}

TEST_CASE("fit_tree validates its contract") {
  MatrixXd x(2, 1);
  x << 0, 1;
  VectorXd y(2);
  y << 0, 1;
  MaskMatrix mask = MaskMatrix::Zero(2, 1);
  CHECK_THROWS_AS(fit_tree(MatrixXd(0, 0), MaskMatrix(0, 0), VectorXd(0), TreeParams{}),
                  ContractError);
  VectorXd bad(2);
  bad << 0.5, 1.0;
  CHECK_THROWS_AS(fit_tree(x, mask, bad, TreeParams{}), ContractError);
  TreeParams zero_depth;
  zero_depth.max_depth = 0;
  CHECK_THROWS_AS(fit_tree(x, mask, y, zero_depth), ConfigError);
}
