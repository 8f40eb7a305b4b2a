#include "ma/eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

namespace ma {

double auroc(const VectorXd& scores, const VectorXd& labels) {
  if (scores.size() != labels.size()) throw ContractError("auroc: length mismatch");
  const auto n = scores.size();
  Eigen::Index npos = 0;
  for (Eigen::Index i = 0; i < n; ++i) npos += labels[i] > 0.5 ? 1 : 0;
  const Eigen::Index nneg = n - npos;
  if (npos == 0 || nneg == 0)
    throw MetricError("auroc undefined: labels contain a single class");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });

  // Average ranks within tied score groups, then the Mann-Whitney statistic.
  double rank_sum_pos = 0;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (Eigen::Index k = i; k <= j; ++k)
      if (labels[order[k]] > 0.5) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(npos) * static_cast<double>(npos + 1);
  return u / (static_cast<double>(npos) * static_cast<double>(nneg));
}

BootstrapCi bootstrap_ci(Eigen::Index n, const BootstrapStat& statistic, int b, double level,
                         std::uint64_t seed) {
  if (b < 100) throw ConfigError("bootstrap_ci: at least 100 resamples required");
  if (level <= 0 || level >= 1) throw ConfigError("bootstrap_ci: level must be in (0, 1)");
  if (n <= 0) throw ContractError("bootstrap_ci: empty sample");

  auto rng = make_rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  std::vector<double> stats;
  stats.reserve(b);
  int skipped = 0;
  std::vector<int> idx(n);
  for (int rep = 0; rep < b; ++rep) {
    for (auto& v : idx) v = pick(rng);
    if (auto value = statistic(idx))
      stats.push_back(*value);
    else
      ++skipped;
  }
  if (skipped * 2 > b)
    throw MetricError("bootstrap_ci: statistic undefined on more than half of the resamples");

  std::sort(stats.begin(), stats.end());
  BootstrapCi ci;
  ci.skipped = skipped;
  ci.lo = quantile_sorted(stats, (1.0 - level) / 2.0);
  ci.hi = quantile_sorted(stats, 1.0 - (1.0 - level) / 2.0);
  return ci;
}

EvaluationReport evaluate(const Model& model, const ImputedDataset& test, int b, double level,
                          std::uint64_t seed) {
  EvaluationReport rep;
  rep.n_test = test.n();
  rep.bootstrap_b = b;
  rep.seed = seed;

  const VectorXd scores = predict(model, test.x);
  const auto reliance = empirical_reliance(model, test);
  rep.auroc = auroc(scores, test.labels);
  rep.rho_hat = reliance.rho_hat;

  auto auroc_stat = [&](const std::vector<int>& idx) -> std::optional<double> {
    VectorXd s(idx.size()), y(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      s[k] = scores[idx[k]];
      y[k] = test.labels[idx[k]];
    }
    bool pos = false, neg = false;
    for (Eigen::Index k = 0; k < y.size(); ++k) (y[k] > 0.5 ? pos : neg) = true;
    if (!pos || !neg) return std::nullopt;
    return auroc(s, y);
  };
  auto rho_stat = [&](const std::vector<int>& idx) -> std::optional<double> {
    double s = 0;
    for (int i : idx) s += reliance.per_sample[i];
    return s / static_cast<double>(idx.size());
  };

  const auto auroc_ci = bootstrap_ci(test.n(), auroc_stat, b, level, splitmix64(seed ^ 0x61));
  const auto rho_ci = bootstrap_ci(test.n(), rho_stat, b, level, splitmix64(seed ^ 0x72));
  rep.auroc_lo = std::min(auroc_ci.lo, rep.auroc);
  rep.auroc_hi = std::max(auroc_ci.hi, rep.auroc);
  rep.rho_lo = std::min(rho_ci.lo, rep.rho_hat);
  rep.rho_hi = std::max(rho_ci.hi, rep.rho_hat);
  return rep;
}

Model fit_model(const HyperParams& p, const ImputedDataset& train) {
  if (p.estimator == "ma_dt") {
    TreeParams tp;
    tp.alpha = p.alpha;
    tp.max_depth = p.max_depth;
    tp.min_samples_split = p.min_samples_split;
    tp.feature_subsample = 1.0;
    tp.seed = p.seed;
    return fit_tree(train.x, train.mask, train.labels, tp);
  }
  if (p.estimator == "ma_lasso") {
    LassoFitParams lp;
    lp.lambda = p.lambda;
    lp.alpha = p.alpha;
    lp.beta = p.beta;
    lp.scheme = p.scheme;
    return fit_ma_lasso(train, lp);
  }
  if (p.estimator == "ma_rf") {
    ForestParams fp;
    fp.n_estimators = p.n_estimators > 0 ? p.n_estimators : 50;
    fp.max_depth = p.max_depth;
    fp.alpha = p.alpha;
    fp.min_samples_split = p.min_samples_split;
    fp.feature_subsample = p.feature_subsample;
    fp.seed = p.seed;
    return fit_ma_rf(train, fp);
  }
  if (p.estimator == "ma_gbt") {
    BoostParams bp;
    bp.n_estimators = p.n_estimators > 0 ? p.n_estimators : 10;
    bp.learning_rate = p.learning_rate;
    bp.alpha = p.alpha;
    bp.max_depth = p.max_depth;
    bp.min_samples_split = p.min_samples_split;
    bp.seed = p.seed;
    return fit_ma_gbt(train, bp);
  }
  throw ConfigError("unknown estimator '" + p.estimator + "'");
}

SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "alpha_star") return SelectionMode::alpha_star;
  if (s == "alpha_zero") return SelectionMode::alpha_zero;
  if (s == "alpha_inf") return SelectionMode::alpha_inf;
  throw ConfigError("unknown selection mode '" + s + "'");
}

std::string to_string(SelectionMode m) {
  switch (m) {
    case SelectionMode::alpha_star: return "alpha_star";
    case SelectionMode::alpha_zero: return "alpha_zero";
    case SelectionMode::alpha_inf: return "alpha_inf";
  }
  return "?";
}

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw ContractError("mean of empty fold metrics");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SelectionResult select_model(const std::vector<Candidate>& candidates, SelectionMode mode) {
  if (candidates.empty()) throw ContractError("select_model: no candidates");
  SelectionResult result;
  result.mode = mode;
  for (const auto& c : candidates)
    result.candidates.push_back({c.params, mean_of(c.fold_aurocs), mean_of(c.fold_rhos)});

  result.max_auroc = result.candidates.front().cv_auroc;
  for (const auto& c : result.candidates) result.max_auroc = std::max(result.max_auroc, c.cv_auroc);
  result.threshold = 0.95 * result.max_auroc;

  const auto& cs = result.candidates;
  switch (mode) {
    case SelectionMode::alpha_star: {
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (cs[i].cv_auroc < result.threshold) continue;
        if (result.chosen < 0 || cs[i].cv_rho < cs[result.chosen].cv_rho ||
            (cs[i].cv_rho == cs[result.chosen].cv_rho &&
             cs[i].params.alpha < cs[result.chosen].params.alpha))
          result.chosen = static_cast<int>(i);
      }
      break;
    }
    case SelectionMode::alpha_zero: {
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (cs[i].params.alpha != 0.0) continue;
        if (result.chosen < 0 || cs[i].cv_auroc > cs[result.chosen].cv_auroc)
          result.chosen = static_cast<int>(i);
      }
      if (result.chosen < 0)
        throw ConfigError("select_model: alpha_zero mode requires a candidate with alpha = 0");
      break;
    }
    case SelectionMode::alpha_inf: {
      double min_rho = cs.front().cv_rho;
      for (const auto& c : cs) min_rho = std::min(min_rho, c.cv_rho);
      const double cutoff = std::max(0.005, min_rho);
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (cs[i].cv_rho > cutoff) continue;
        if (result.chosen < 0 || cs[i].cv_auroc > cs[result.chosen].cv_auroc ||
            (cs[i].cv_auroc == cs[result.chosen].cv_auroc &&
             cs[i].params.alpha > cs[result.chosen].params.alpha))
          result.chosen = static_cast<int>(i);
      }
      break;
    }
  }
  return result;
}

namespace {

ImputedDataset prepare(const Dataset& ds, const PipelineConfig& config, Encoding* enc_out,
                       ImputeStats* stats_out) {
  const auto enc = fit_encoding(ds, config.standardize);
  const auto encoded = apply_encoding(ds, enc);
  const auto stats = fit_impute(encoded, config.imputation);
  if (enc_out) *enc_out = enc;
  if (stats_out) *stats_out = stats;
  return apply_impute(encoded, stats);
}

ImputedDataset prepare_with(const Dataset& ds, const Encoding& enc, const ImputeStats& stats) {
  return apply_impute(apply_encoding(ds, enc), stats);
}

}  // namespace

std::vector<Candidate> cross_validate(const Dataset& ds, const PipelineConfig& config,
                                      const std::vector<HyperParams>& grid, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("cross_validate: empty hyperparameter grid");
  const auto folds = kfold(ds, config.cv_folds, seed);

  std::vector<Candidate> candidates(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) candidates[g].params = grid[g];

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto train_ds = subset(ds, folds[f].first);
    const auto val_ds = subset(ds, folds[f].second);
    Encoding enc;
    ImputeStats stats;
    const auto train = prepare(train_ds, config, &enc, &stats);
    const auto val = prepare_with(val_ds, enc, stats);

    auto run_one = [&](std::size_t g) {
      HyperParams p = grid[g];
      p.seed = splitmix64(seed ^ splitmix64((f << 20) ^ g));
      const auto model = fit_model(p, train);
      const VectorXd scores = predict(model, val.x);
      candidates[g].fold_aurocs.push_back(auroc(scores, val.labels));
      candidates[g].fold_rhos.push_back(empirical_reliance(model, val).rho_hat);
    };

    const int jobs = std::max(1, config.jobs);
    if (jobs == 1 || grid.size() == 1) {
      for (std::size_t g = 0; g < grid.size(); ++g) run_one(g);
    } else {
      // Fold metrics land in per-candidate slots, so order is preserved.
      for (auto& c : candidates) {
        c.fold_aurocs.resize(f + 1);
        c.fold_rhos.resize(f + 1);
      }
      std::vector<std::future<void>> tasks;
      for (int w = 0; w < jobs; ++w) {
        tasks.push_back(std::async(std::launch::async, [&, w] {
          for (std::size_t g = w; g < grid.size(); g += jobs) {
            HyperParams p = grid[g];
            p.seed = splitmix64(seed ^ splitmix64((f << 20) ^ g));
            const auto model = fit_model(p, train);
            const VectorXd scores = predict(model, val.x);
            candidates[g].fold_aurocs[f] = auroc(scores, val.labels);
            candidates[g].fold_rhos[f] = empirical_reliance(model, val).rho_hat;
          }
        }));
      }
      for (auto& t : tasks) t.get();
    }
  }
  return candidates;
}

TrainResult train_pipeline(const Dataset& ds, const PipelineConfig& config,
                           const std::vector<HyperParams>& grid, SelectionMode mode,
                           std::uint64_t seed) {
  auto [train_ds, test_ds] = train_test_split(ds, config.test_fraction, seed);

  std::vector<HyperParams> effective = grid;
  if (mode == SelectionMode::alpha_zero) {
    for (auto& p : effective) p.alpha = 0.0;
    // zeroing alpha collapses grid points that differed only in alpha
    std::vector<HyperParams> unique;
    for (const auto& p : effective) {
      const bool seen = std::any_of(unique.begin(), unique.end(), [&](const HyperParams& q) {
        return q.max_depth == p.max_depth && q.min_samples_split == p.min_samples_split &&
               q.n_estimators == p.n_estimators && q.learning_rate == p.learning_rate &&
               q.lambda == p.lambda && q.beta == p.beta && q.scheme == p.scheme &&
               q.feature_subsample == p.feature_subsample;
      });
      if (!seen) unique.push_back(p);
    }
    effective = std::move(unique);
  }

  const auto candidates = cross_validate(train_ds, config, effective, splitmix64(seed ^ 0xcf));
  const auto selection = select_model(candidates, mode);

  TrainResult result;
  result.selection = selection;
  result.chosen = selection.candidates[selection.chosen].params;
  result.chosen.seed = splitmix64(seed ^ 0xf1);
  result.split_seed = seed;

  const auto train = prepare(train_ds, config, &result.encoding, &result.impute_stats);
  const auto test = prepare_with(test_ds, result.encoding, result.impute_stats);
  result.model = fit_model(result.chosen, train);
  result.report =
      evaluate(result.model, test, config.bootstrap_b, config.ci_level, splitmix64(seed ^ 0xe7));
  return result;
}

std::vector<SweepRow> sweep(const Dataset& ds, const PipelineConfig& config,
                            const std::vector<HyperParams>& grid,
                            const std::vector<std::uint64_t>& split_seeds) {
  if (grid.empty()) throw ConfigError("sweep: empty hyperparameter grid");
  if (split_seeds.empty()) throw ConfigError("sweep: no split seeds");

  std::vector<SweepRow> rows;
  for (const auto split_seed : split_seeds) {
    auto [train_ds, test_ds] = train_test_split(ds, config.test_fraction, split_seed);
    Encoding enc;
    ImputeStats stats;
    const auto train = prepare(train_ds, config, &enc, &stats);
    const auto test = prepare_with(test_ds, enc, stats);

    std::vector<SweepRow> block(grid.size());
    auto run_one = [&](std::size_t g) {
      HyperParams p = grid[g];
      p.seed = splitmix64(split_seed ^ splitmix64(g));
      const auto model = fit_model(p, train);
      block[g] = {split_seed, p,
                  evaluate(model, test, config.bootstrap_b, config.ci_level,
                           splitmix64(split_seed ^ splitmix64(0x5e ^ g)))};
    };

    const int jobs = std::max(1, config.jobs);
    if (jobs == 1 || grid.size() == 1) {
      for (std::size_t g = 0; g < grid.size(); ++g) run_one(g);
    } else {
      std::vector<std::future<void>> tasks;
      for (int w = 0; w < jobs; ++w) {
        tasks.push_back(std::async(std::launch::async, [&, w] {
          for (std::size_t g = w; g < grid.size(); g += jobs) run_one(g);
        }));
      }
      for (auto& t : tasks) t.get();
    }
    rows.insert(rows.end(), block.begin(), block.end());
  }
  return rows;
}

}  // namespace ma
