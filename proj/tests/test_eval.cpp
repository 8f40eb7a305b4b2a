#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ma/eval.hpp"
#include "ma/oddc.hpp"
#include "oracles.hpp"

#include <set>

using namespace ma;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Candidate candidate(double alpha, std::initializer_list<double> aurocs,
                    std::initializer_list<double> rhos) {
  Candidate c;
  c.params.alpha = alpha;
  c.fold_aurocs = aurocs;
  c.fold_rhos = rhos;
  return c;
}

}  // namespace

TEST_CASE("auroc on small hand-checked vectors") {
  CHECK(auroc(vec({0.9, 0.1}), vec({1, 0})) == doctest::Approx(1.0));
  CHECK(auroc(vec({0.5, 0.5, 0.5, 0.5}), vec({1, 0, 1, 0})) == doctest::Approx(0.5));
  // pairs: (0.8,0.6) win, (0.8,0.2) win, (0.4,0.6) loss, (0.4,0.2) win -> 3/4
  CHECK(auroc(vec({0.8, 0.6, 0.4, 0.2}), vec({1, 0, 1, 0})) == doctest::Approx(0.75));
  CHECK_THROWS_AS(auroc(vec({0.1, 0.2}), vec({1, 1})), MetricError);
}

TEST_CASE("auroc equals pairwise enumeration on random vectors with ties") {
  auto rng = make_rng(12);
  std::uniform_int_distribution<int> n_dist(5, 120), level_dist(0, 9);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = n_dist(rng);
    VectorXd scores(n), labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = level_dist(rng) / 9.0;  // coarse grid forces ties
      labels[i] = u(rng) < 0.5 ? 1.0 : 0.0;
    }
    labels[0] = 0;
    labels[n - 1] = 1;
    CHECK(std::abs(auroc(scores, labels) - oracle::auroc_pairs(scores, labels)) < 1e-12);
  }
}

TEST_CASE("auroc is invariant to strictly increasing transforms") {
  auto rng = make_rng(13);
  std::normal_distribution<double> g;
  VectorXd scores(40), labels(40);
  for (int i = 0; i < 40; ++i) {
    scores[i] = g(rng);
    labels[i] = i % 3 == 0 ? 1.0 : 0.0;
  }
  const double base = auroc(scores, labels);
  VectorXd warped = scores;
  for (int i = 0; i < 40; ++i) warped[i] = std::exp(3.0 * scores[i]) + 5.0;
  CHECK(auroc(warped, labels) == doctest::Approx(base).epsilon(1e-12));

  // no ties: complement identity
  CHECK(auroc(-scores, labels) == doctest::Approx(1.0 - base).epsilon(1e-12));
}

TEST_CASE("bootstrap intervals are deterministic and degenerate on constants") {
  auto constant = [](const std::vector<int>&) -> std::optional<double> { return 0.7; };
  const auto ci = bootstrap_ci(50, constant, 500, 0.95, 11);
  CHECK(ci.lo == 0.7);
  CHECK(ci.hi == 0.7);

  VectorXd flags = VectorXd::Zero(1000);
  flags.head(300).setOnes();
  auto mean_stat = [&](const std::vector<int>& idx) -> std::optional<double> {
    double s = 0;
    for (int i : idx) s += flags[i];
    return s / static_cast<double>(idx.size());
  };
  const auto a = bootstrap_ci(1000, mean_stat, 1000, 0.95, 7);
  const auto b = bootstrap_ci(1000, mean_stat, 1000, 0.95, 7);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.lo <= 0.3);
  CHECK(a.hi >= 0.3);
  CHECK(a.lo > 0.25);
  CHECK(a.hi < 0.35);

  CHECK_THROWS_AS(bootstrap_ci(1000, mean_stat, 50, 0.95, 7), ConfigError);
}

TEST_CASE("bootstrap skip accounting and the unstable-metric error") {
  int calls = 0;
  auto flaky = [&](const std::vector<int>& idx) -> std::optional<double> {
    ++calls;
    if (idx[0] != 0) return std::nullopt;  // skipped most of the time
    return 1.0;
  };
  CHECK_THROWS_AS(bootstrap_ci(10, flaky, 200, 0.95, 3), MetricError);

  auto rarely = [&](const std::vector<int>& idx) -> std::optional<double> {
    return idx[0] == 0 ? std::optional<double>(std::nullopt) : 0.5;
  };
  const auto ci = bootstrap_ci(10, rarely, 200, 0.95, 3);
  CHECK(ci.skipped > 0);
  CHECK(ci.lo == 0.5);
}

TEST_CASE("bootstrap interval width shrinks roughly as root n") {
  auto rng = make_rng(29);
  std::uniform_real_distribution<double> u;
  double width_small = 0, width_large = 0;
  const int reps = 30;
  for (int rep = 0; rep < reps; ++rep) {
    for (const int n : {400, 800}) {
      VectorXd flags(n);
      for (int i = 0; i < n; ++i) flags[i] = u(rng) < 0.3 ? 1.0 : 0.0;
      auto stat = [&](const std::vector<int>& idx) -> std::optional<double> {
        double s = 0;
        for (int i : idx) s += flags[i];
        return s / static_cast<double>(idx.size());
      };
      const auto ci = bootstrap_ci(n, stat, 400, 0.95, 1000 + rep);
      (n == 400 ? width_small : width_large) += ci.hi - ci.lo;
    }
  }
  const double factor = width_small / width_large;
  CHECK(factor > 1.25);
  CHECK(factor < 1.6);
}

TEST_CASE("select_model applies the 95-percent rule with ties") {
  SUBCASE("single candidate") {
    const auto result = select_model({candidate(0.1, {0.8}, {0.2})}, SelectionMode::alpha_star);
    CHECK(result.chosen == 0);
  }
  SUBCASE("qualifier with lowest reliance wins") {
    const auto result = select_model({candidate(0.0, {0.90}, {0.40}),
                                      candidate(0.1, {0.87}, {0.05}),
                                      candidate(1.0, {0.84}, {0.00})},
                                     SelectionMode::alpha_star);
    CHECK(result.max_auroc == doctest::Approx(0.90));
    CHECK(result.threshold == doctest::Approx(0.855));
    CHECK(result.chosen == 1);  // the 0.84 candidate is below threshold
  }
  SUBCASE("reliance ties break toward lower alpha") {
    const auto result = select_model({candidate(1.0, {0.88}, {0.0}),
                                      candidate(0.1, {0.90}, {0.0}),
                                      candidate(0.5, {0.89}, {0.0})},
                                     SelectionMode::alpha_star);
    CHECK(result.candidates[result.chosen].params.alpha == 0.1);
  }
  SUBCASE("chosen candidate always meets the threshold") {
    auto rng = make_rng(31);
    std::uniform_real_distribution<double> u;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Candidate> cs;
      const int k = 2 + trial % 6;
      for (int i = 0; i < k; ++i)
        cs.push_back(candidate(0.1 * i, {0.5 + 0.5 * u(rng)}, {u(rng)}));
      const auto result = select_model(cs, SelectionMode::alpha_star);
      CHECK(result.candidates[result.chosen].cv_auroc >= result.threshold);

      // removing a non-chosen, non-max candidate leaves the choice intact
      int max_idx = 0;
      for (int i = 0; i < k; ++i)
        if (cs[i].fold_aurocs[0] > cs[max_idx].fold_aurocs[0]) max_idx = i;
      for (int drop = 0; drop < k; ++drop) {
        if (drop == result.chosen || drop == max_idx) continue;
        std::vector<Candidate> reduced;
        for (int i = 0; i < k; ++i)
          if (i != drop) reduced.push_back(cs[i]);
        const auto again = select_model(reduced, SelectionMode::alpha_star);
        CHECK(again.candidates[again.chosen].params.alpha ==
              result.candidates[result.chosen].params.alpha);
      }
    }
  }
  SUBCASE("alpha_zero and alpha_inf modes") {
    const std::vector<Candidate> cs = {candidate(0.0, {0.91}, {0.30}),
                                       candidate(0.5, {0.89}, {0.004}),
                                       candidate(2.0, {0.85}, {0.000})};
    const auto zero = select_model(cs, SelectionMode::alpha_zero);
    CHECK(zero.candidates[zero.chosen].params.alpha == 0.0);
    const auto inf = select_model(cs, SelectionMode::alpha_inf);
    CHECK(inf.candidates[inf.chosen].params.alpha == 0.5);  // best AUROC among rho <= 0.005
  }
}

TEST_CASE("evaluate produces intervals containing the point estimates") {
  auto process = clinic_process();
  const auto ds = generate(process, 600, 77);
  const auto data = impute(encode(ds, false), ImputeStrategy::zero);

  TreeParams tp;
  tp.max_depth = 3;
  const auto tree = fit_tree(data.x, data.mask, data.labels, tp);
  const auto report = evaluate(Model{tree}, data, 500, 0.95, 5);
  CHECK(report.auroc_lo <= report.auroc);
  CHECK(report.auroc <= report.auroc_hi);
  CHECK(report.rho_lo <= report.rho_hat);
  CHECK(report.rho_hat <= report.rho_hi);
  CHECK(report.n_test == 600);

  const auto again = evaluate(Model{tree}, data, 500, 0.95, 5);
  CHECK(again.auroc_lo == report.auroc_lo);
  CHECK(again.rho_hi == report.rho_hi);
}

TEST_CASE("cross-validation feeds the selection rule end to end") {
  auto process = clinic_process();
  const auto ds = generate(process, 900, 123);

  PipelineConfig config;
  config.standardize = false;
  config.bootstrap_b = 200;

  std::vector<HyperParams> grid;
  for (const double alpha : {0.0, 10.0}) {
    HyperParams p;
    p.estimator = "ma_dt";
    p.alpha = alpha;
    p.max_depth = 3;
    grid.push_back(p);
  }
  const auto candidates = cross_validate(ds, config, grid, 9);
  REQUIRE(candidates.size() == 2);
  CHECK(candidates[0].fold_aurocs.size() == 3);
  // reliance drops with the large alpha
  const auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  CHECK(mean(candidates[1].fold_rhos) < mean(candidates[0].fold_rhos));

  const auto result = train_pipeline(ds, config, grid, SelectionMode::alpha_star, 4);
  CHECK(result.report.auroc > 0.5);
  CHECK(result.selection.chosen >= 0);
}

TEST_CASE("sweep emits one row per split and grid point") {
  auto process = clinic_process();
  const auto ds = generate(process, 500, 55);

  PipelineConfig config;
  config.standardize = false;
  config.bootstrap_b = 200;

  HyperParams p;
  p.estimator = "ma_dt";
  p.max_depth = 3;

  SUBCASE("single point, several splits") {
    const auto rows = sweep(ds, config, {p}, {1, 2, 3, 4, 5});
    REQUIRE(rows.size() == 5);
    std::set<std::uint64_t> seeds;
    for (const auto& row : rows) seeds.insert(row.split_seed);
    CHECK(seeds.size() == 5);
  }

  SUBCASE("reliance responds to alpha on rule-structured data") {
    HyperParams regularized = p;
    regularized.alpha = 10.0;
    const auto rows = sweep(ds, config, {p, regularized}, {1, 2, 3});
    REQUIRE(rows.size() == 6);
    for (std::size_t s = 0; s < 3; ++s) {
      const auto& plain = rows[2 * s];
      const auto& tight = rows[2 * s + 1];
      CHECK(plain.params.alpha == 0.0);
      CHECK(tight.params.alpha == 10.0);
      CHECK(tight.report.rho_hat < plain.report.rho_hat);
    }
  }

  SUBCASE("empty grid is rejected") {
    CHECK_THROWS_AS(sweep(ds, config, {}, {1}), ConfigError);
  }

  SUBCASE("results are independent of the job count") {
    HyperParams regularized = p;
    regularized.alpha = 1.0;
    HyperParams deeper = p;
    deeper.max_depth = 2;
    const std::vector<HyperParams> grid = {p, regularized, deeper};

    const auto serial = sweep(ds, config, grid, {3, 4});
    PipelineConfig parallel = config;
    parallel.jobs = 3;
    const auto threaded = sweep(ds, parallel, grid, {3, 4});
    REQUIRE(serial.size() == threaded.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].split_seed == threaded[i].split_seed);
      CHECK(serial[i].report.auroc == threaded[i].report.auroc);
      CHECK(serial[i].report.rho_hat == threaded[i].report.rho_hat);
      CHECK(serial[i].report.auroc_lo == threaded[i].report.auroc_lo);
    }

    const auto cv_serial = cross_validate(ds, config, grid, 5);
    const auto cv_threaded = cross_validate(ds, parallel, grid, 5);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      CHECK(cv_serial[g].fold_aurocs == cv_threaded[g].fold_aurocs);
      CHECK(cv_serial[g].fold_rhos == cv_threaded[g].fold_rhos);
    }
  }
}
