// Command-line interface: train, sweep, synth, inject, inspect, verify-oddc.
// Exit codes: 0 success, 2 usage/configuration error, 3 data error,
// 4 property violation.
#include "ma/dataset.hpp"
#include "ma/eval.hpp"
#include "ma/model_io.hpp"
#include "ma/oddc.hpp"
#include "ma/reliance.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace ma;

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct DataOptions {
  std::string data_path;
  std::string label;
  std::string synth_spec;
  int synth_n = 5000;
  std::uint64_t synth_seed = 0;
  std::vector<std::string> na_tokens;
};

struct PipelineOptions {
  std::string estimator = "ma_dt";
  std::string imputation = "zero";
  bool standardize = true;
  std::string selection = "alpha_star";
  double test_fraction = 0.2;
  int folds = 3;
  int bootstrap_b = 1000;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::vector<double> alpha_grid;
  std::vector<int> depth_grid;
  std::vector<double> lr_grid;
  std::vector<double> lambda_grid;
  std::vector<double> beta_grid;
  std::string scheme = "eq5";
  int n_estimators = 0;
  int min_samples_split = 2;
  int grid_samples = 0;  // 0: exhaustive product
};

void add_data_options(CLI::App* cmd, DataOptions& opt) {
  cmd->add_option("--data", opt.data_path, "CSV dataset path");
  cmd->add_option("--label", opt.label, "label column name (binary)");
  cmd->add_option("--synth", opt.synth_spec,
                  "synthetic process instead of --data: 'clinic' or a process spec JSON path");
  cmd->add_option("--synth-n", opt.synth_n, "rows to generate for --synth");
  cmd->add_option("--synth-seed", opt.synth_seed, "generator seed for --synth");
  cmd->add_option("--na-token", opt.na_tokens, "additional NA tokens for CSV parsing");
}

OddcProcess resolve_process(const std::string& spec) {
  if (spec == "clinic") return clinic_process();
  std::ifstream in(spec);
  if (!in) throw DataError("cannot open process spec " + spec);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(spec + ": " + e.what());
  }
  return process_from_json(j);
}

Dataset resolve_dataset(const DataOptions& opt) {
  if (!opt.synth_spec.empty()) {
    return generate(resolve_process(opt.synth_spec), opt.synth_n, opt.synth_seed);
  }
  if (opt.data_path.empty()) throw ConfigError("either --data or --synth is required");
  if (opt.label.empty()) throw ConfigError("--label is required with --data");
  CsvSchema schema;
  schema.label_column = opt.label;
  for (const auto& tok : opt.na_tokens) schema.na_tokens.insert(tok);
  return load_csv(opt.data_path, schema);
}

std::vector<HyperParams> build_grid(const PipelineOptions& opt) {
  const auto scheme = scheme_from_string(opt.scheme);

  std::vector<double> alphas = opt.alpha_grid;
  std::vector<int> depths = opt.depth_grid;
  std::vector<double> lrs = opt.lr_grid;
  std::vector<double> lambdas = opt.lambda_grid;
  std::vector<double> betas = opt.beta_grid;

  if (alphas.empty()) {
    if (opt.estimator == "ma_lasso" && scheme == PenaltyScheme::appC2)
      alphas = {1, 10, 100, 1000, 10000};
    else
      alphas = {0.001, 0.01, 0.1, 1, 10};
  }
  if (depths.empty())
    depths = opt.estimator == "ma_dt" ? std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}
                                      : std::vector<int>{1, 2, 3, 4, 5, 6, 7};
  if (lrs.empty()) lrs = {0.01, 0.1};
  if (lambdas.empty()) lambdas = {0.001, 0.01, 0.1};
  if (betas.empty()) betas = {0.001, 0.01, 0.1, 1, 10, 100, 1000};

  std::vector<HyperParams> grid;
  HyperParams base;
  base.estimator = opt.estimator;
  base.scheme = scheme;
  base.min_samples_split = opt.min_samples_split;
  base.n_estimators = opt.n_estimators;

  if (opt.estimator == "ma_lasso") {
    const auto& inner = scheme == PenaltyScheme::appC2 ? betas : lambdas;
    for (const double alpha : alphas) {
      for (const double v : inner) {
        HyperParams p = base;
        p.alpha = alpha;
        if (scheme == PenaltyScheme::appC2)
          p.beta = v;
        else
          p.lambda = v;
        grid.push_back(p);
      }
    }
  } else if (opt.estimator == "ma_gbt") {
    for (const double alpha : alphas)
      for (const int depth : depths)
        for (const double lr : lrs) {
          HyperParams p = base;
          p.alpha = alpha;
          p.max_depth = depth;
          p.learning_rate = lr;
          grid.push_back(p);
        }
  } else if (opt.estimator == "ma_dt" || opt.estimator == "ma_rf") {
    for (const double alpha : alphas)
      for (const int depth : depths) {
        HyperParams p = base;
        p.alpha = alpha;
        p.max_depth = depth;
        grid.push_back(p);
      }
  } else {
    throw ConfigError("unknown estimator '" + opt.estimator + "'");
  }

  if (grid.empty()) throw ConfigError("empty hyperparameter grid");
  if (opt.grid_samples > 0 && opt.grid_samples < static_cast<int>(grid.size())) {
    auto rng = substream(opt.seed, 0x9d1d);
    std::vector<HyperParams> sampled;
    std::vector<int> idx(grid.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < opt.grid_samples; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(grid.size()) - 1);
      std::swap(idx[i], idx[pick(rng)]);
      sampled.push_back(grid[idx[i]]);
    }
    return sampled;
  }
  return grid;
}

PipelineConfig to_config(const PipelineOptions& opt) {
  if (opt.imputation != "zero" && opt.imputation != "mean_mode")
    throw ConfigError("imputation must be zero or mean_mode");
  PipelineConfig config;
  config.standardize = opt.standardize;
  config.imputation =
      opt.imputation == "mean_mode" ? ImputeStrategy::mean_mode : ImputeStrategy::zero;
  config.test_fraction = opt.test_fraction;
  config.cv_folds = opt.folds;
  config.bootstrap_b = opt.bootstrap_b;
  config.jobs = opt.jobs;
  return config;
}

json manifest_base(const std::string& command, const DataOptions& data) {
  json m{{"command", command}, {"version", kVersion}};
  if (!data.synth_spec.empty()) {
    m["synth"] = {{"spec", data.synth_spec}, {"n", data.synth_n}, {"seed", data.synth_seed}};
  } else {
    m["data"] = data.data_path;
    m["label"] = data.label;
  }
  return m;
}

json column_kinds(const Dataset& ds) {
  json cols = json::array();
  for (const auto& col : ds.columns)
    cols.push_back({{"name", col.name},
                    {"kind", col.kind == ColumnKind::numeric ? "numeric" : "categorical"}});
  return cols;
}

void write_json(const std::string& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "split_seed,estimator,alpha,max_depth,min_samples_split,n_estimators,learning_rate,"
         "lambda,beta,scheme,feature_subsample,auroc,auroc_lo,auroc_hi,rho_hat,rho_lo,rho_hi\n";
  for (const auto& row : rows) {
    const auto& p = row.params;
    const auto& r = row.report;
    out << row.split_seed << ',' << p.estimator << ',' << fmt(p.alpha) << ',' << p.max_depth << ','
        << p.min_samples_split << ',' << p.n_estimators << ',' << fmt(p.learning_rate) << ','
        << fmt(p.lambda) << ',' << fmt(p.beta) << ',' << to_string(p.scheme) << ','
        << fmt(p.feature_subsample) << ',' << fmt(r.auroc) << ',' << fmt(r.auroc_lo) << ','
        << fmt(r.auroc_hi) << ',' << fmt(r.rho_hat) << ',' << fmt(r.rho_lo) << ','
        << fmt(r.rho_hi) << '\n';
  }
  return out.str();
}

int run_train(const DataOptions& data_opt, const PipelineOptions& pipe_opt,
              const std::string& outdir) {
  const auto ds = resolve_dataset(data_opt);
  const auto grid = build_grid(pipe_opt);
  const auto config = to_config(pipe_opt);
  const auto mode = selection_mode_from_string(pipe_opt.selection);

  const auto result = train_pipeline(ds, config, grid, mode, pipe_opt.seed);

  std::filesystem::create_directories(outdir);
  save_model(result.model, outdir + "/model.json");
  write_json(outdir + "/report.json", evaluation_report_to_json(result.report));
  write_json(outdir + "/selection.json", selection_result_to_json(result.selection));
  {
    auto [train_split, test_split] = train_test_split(ds, config.test_fraction, pipe_opt.seed);
    const auto test =
        apply_impute(apply_encoding(test_split, result.encoding), result.impute_stats);
    write_json(outdir + "/reliance.json",
               reliance_report_to_json(empirical_reliance(result.model, test)));
  }

  auto manifest = manifest_base("train", data_opt);
  manifest["seed"] = pipe_opt.seed;
  manifest["estimator"] = pipe_opt.estimator;
  manifest["selection_mode"] = pipe_opt.selection;
  manifest["imputation"] = pipe_opt.imputation;
  manifest["standardize"] = pipe_opt.standardize;
  manifest["test_fraction"] = pipe_opt.test_fraction;
  manifest["folds"] = pipe_opt.folds;
  manifest["bootstrap_b"] = pipe_opt.bootstrap_b;
  manifest["grid_size"] = grid.size();
  manifest["chosen"] = hyperparams_to_json(result.chosen);
  write_json(outdir + "/manifest.json", manifest);

  int clamped = 0;
  for (const auto flag : result.encoding.standardization.clamped) clamped += flag;

  std::ostringstream summary;
  summary << "estimator      " << pipe_opt.estimator << "\n"
          << "selection      " << pipe_opt.selection << "\n";
  if (clamped > 0)
    summary << "note           " << clamped
            << " constant column(s) kept unit scale during standardization\n";
  summary
          << "chosen alpha   " << fmt(result.chosen.alpha) << "\n"
          << "chosen depth   " << result.chosen.max_depth << "\n"
          << "cv candidates  " << result.selection.candidates.size() << "\n"
          << "test auroc     " << fmt(result.report.auroc) << "  [" << fmt(result.report.auroc_lo)
          << ", " << fmt(result.report.auroc_hi) << "]\n"
          << "test rho_hat   " << fmt(result.report.rho_hat) << "  [" << fmt(result.report.rho_lo)
          << ", " << fmt(result.report.rho_hi) << "]\n"
          << "test rows      " << result.report.n_test << "\n";
  write_atomic(outdir + "/summary.txt", summary.str());
  std::cout << summary.str();
  return 0;
}

int run_sweep(const DataOptions& data_opt, const PipelineOptions& pipe_opt, int splits,
              const std::string& out_csv) {
  const auto ds = resolve_dataset(data_opt);
  const auto grid = build_grid(pipe_opt);
  const auto config = to_config(pipe_opt);

  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < splits; ++s) seeds.push_back(pipe_opt.seed + static_cast<std::uint64_t>(s));

  const auto rows = sweep(ds, config, grid, seeds);
  write_atomic(out_csv, sweep_csv(rows));

  auto manifest = manifest_base("sweep", data_opt);
  manifest["seed"] = pipe_opt.seed;
  manifest["splits"] = splits;
  manifest["estimator"] = pipe_opt.estimator;
  manifest["grid_size"] = grid.size();
  manifest["imputation"] = pipe_opt.imputation;
  manifest["standardize"] = pipe_opt.standardize;
  manifest["bootstrap_b"] = pipe_opt.bootstrap_b;
  write_json(out_csv + ".manifest.json", manifest);

  std::cout << "wrote " << rows.size() << " rows to " << out_csv << "\n";
  return 0;
}

int run_synth(const std::string& spec, int n, std::uint64_t seed, const std::string& out_csv) {
  const auto process = resolve_process(spec);
  const auto ds = generate(process, n, seed);
  save_csv(ds, out_csv);

  json manifest{{"command", "synth"},
                {"version", kVersion},
                {"spec", spec},
                {"n", n},
                {"seed", seed},
                {"label", ds.label_name},
                {"columns", column_kinds(ds)},
                {"process", process_to_json(process)}};
  write_json(out_csv + ".manifest.json", manifest);
  std::cout << "wrote " << n << " rows to " << out_csv << "\n";
  return 0;
}

int run_inject(const DataOptions& data_opt, const std::string& mechanism, double rate,
               double feature_fraction, std::uint64_t seed, const std::string& out_csv) {
  const auto ds = resolve_dataset(data_opt);
  const auto injected =
      inject_missingness(ds, mechanism_from_string(mechanism), rate, feature_fraction, seed);
  save_csv(injected, out_csv);

  auto manifest = manifest_base("inject", data_opt);
  manifest["columns"] = column_kinds(injected);
  manifest["mechanism"] = mechanism;
  manifest["rate"] = rate;
  manifest["feature_fraction"] = feature_fraction;
  manifest["seed"] = seed;
  write_json(out_csv + ".manifest.json", manifest);
  std::cout << "wrote " << out_csv << "\n";
  return 0;
}

int run_inspect(const std::string& model_path, const std::string& format,
                const DataOptions& data_opt, const std::string& out) {
  const auto model = load_model(model_path);

  std::optional<ImputedDataset> data;
  if (!data_opt.data_path.empty() || !data_opt.synth_spec.empty()) {
    const auto ds = resolve_dataset(data_opt);
    data = impute(encode(ds, false), ImputeStrategy::zero);
  }

  auto emit = [&](const std::string& content, const std::string& default_name) {
    if (out.empty()) {
      std::cout << content;
    } else if (std::filesystem::is_directory(out)) {
      write_atomic(out + "/" + default_name, content);
    } else {
      write_atomic(out, content);
    }
  };

  if (format == "json") {
    emit(model_to_json(model).dump(2) + "\n", "model.json");
    return 0;
  }

  if (format == "dot") {
    const MatrixXd* x = data ? &data->x : nullptr;
    const MaskMatrix* mask = data ? &data->mask : nullptr;
    const std::vector<std::string> names =
        data ? data->feature_names : std::vector<std::string>{};
    if (const auto* tree = std::get_if<DecisionTree>(&model)) {
      emit(tree_to_dot(*tree, names, x, mask), "tree.dot");
    } else if (const auto* ens = std::get_if<Ensemble>(&model)) {
      if (out.empty() || !std::filesystem::is_directory(out))
        throw ConfigError("--out must name a directory for ensemble dot export");
      std::ostringstream index;
      for (std::size_t t = 0; t < ens->trees.size(); ++t) {
        const auto name = "tree_" + std::to_string(t) + ".dot";
        write_atomic(out + "/" + name, tree_to_dot(ens->trees[t], names, x, mask));
        index << name << "\n";
      }
      write_atomic(out + "/index.txt", index.str());
    } else {
      throw ConfigError("dot export applies to tree models");
    }
    return 0;
  }

  if (format == "text") {
    std::ostringstream text;
    if (const auto* linear = std::get_if<LinearModel>(&model)) {
      // coefficient table sorted by |theta|, with penalty weights and
      // missingness rates when a dataset is provided
      std::vector<int> order(linear->theta.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(linear->theta[a]) > std::abs(linear->theta[b]);
      });
      text << "intercept " << fmt(linear->intercept) << "\n";
      text << "feature\ttheta\tlambda_j\tmissing_rate\n";
      for (int j : order) {
        const std::string name = j < static_cast<int>(linear->feature_names.size())
                                     ? linear->feature_names[j]
                                     : "x" + std::to_string(j);
        text << name << '\t' << fmt(linear->theta[j]) << '\t' << fmt(linear->penalty_weights[j])
             << '\t';
        if (data && data->d() == linear->theta.size())
          text << fmt(data->mask.col(j).cast<double>().mean());
        text << '\n';
      }
    } else if (const auto* tree = std::get_if<DecisionTree>(&model)) {
      text << "decision tree: " << tree->nodes.size() << " nodes, depth " << tree->depth() << ", "
           << tree->leaf_count() << " leaves\n";
    } else {
      const auto& ens = std::get<Ensemble>(model);
      text << (ens.kind == EnsembleKind::forest ? "forest" : "boosted")
           << " ensemble: " << ens.trees.size() << " trees\n";
    }
    emit(text.str(), "model.txt");
    return 0;
  }

  throw ConfigError("format must be json, dot or text");
}

int run_verify(const std::string& model_path, const std::string& spec, int n,
               std::uint64_t seed) {
  const auto model = load_model(model_path);
  const auto* tree = std::get_if<DecisionTree>(&model);
  if (!tree) throw ConfigError("verify-oddc applies to single-tree models");
  const auto process = resolve_process(spec);

  const auto reference = generate(process, std::max(100, n / 10), splitmix64(seed));
  const auto check = check_tree(*tree, process.rules, reference);
  std::cout << "check_tree: " << (check.ok ? "satisfied" : "violated") << "\n";
  for (const auto& nc : check.nodes) {
    if (!nc.satisfied)
      std::cout << "  node " << nc.node << (nc.incomplete ? " (undecidable antecedent)" : "")
                << " violates the rules\n";
  }

  const auto prop1 = verify_prop1(*tree, process, n, seed);
  std::cout << "fresh samples checked: " << prop1.checked << "\n";
  if (!prop1.ok()) {
    std::cout << "reliant rows: " << prop1.violations.size() << "\n";
    const auto& [row, path] = prop1.violations.front();
    std::cout << "  first violation at row " << row << ", path";
    for (int u : path) std::cout << ' ' << u;
    std::cout << "\n";
  }
  if (!check.ok || !prop1.ok()) return 4;
  std::cout << "empirical reliance: 0 exactly\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"missingness-avoiding supervised learning"};
  app.set_version_flag("--app-version", kVersion);
  app.set_config("--config", "", "read options from a TOML-style config file");
  app.require_subcommand(1);

  DataOptions data_opt;
  PipelineOptions pipe_opt;
  std::string outdir = "out";
  std::string out_csv = "sweep.csv";
  int splits = 5;

  auto add_pipeline_options = [&](CLI::App* cmd) {
    cmd->add_option("--estimator", pipe_opt.estimator, "ma_dt | ma_lasso | ma_rf | ma_gbt");
    cmd->add_option("--imputation", pipe_opt.imputation, "zero | mean_mode");
    cmd->add_flag("--standardize,!--no-standardize", pipe_opt.standardize,
                  "standardize numeric features");
    cmd->add_option("--seed", pipe_opt.seed, "base seed");
    cmd->add_option("--test-fraction", pipe_opt.test_fraction, "held-out fraction");
    cmd->add_option("--folds", pipe_opt.folds, "cross-validation folds");
    cmd->add_option("--bootstrap", pipe_opt.bootstrap_b, "bootstrap resamples");
    cmd->add_option("--jobs", pipe_opt.jobs, "parallel workers");
    cmd->add_option("--alpha-grid", pipe_opt.alpha_grid, "reliance regularization grid");
    cmd->add_option("--depth-grid", pipe_opt.depth_grid, "max depth grid");
    cmd->add_option("--lr-grid", pipe_opt.lr_grid, "learning rate grid (ma_gbt)");
    cmd->add_option("--lambda-grid", pipe_opt.lambda_grid, "base penalty grid (ma_lasso, eq5)");
    cmd->add_option("--beta-grid", pipe_opt.beta_grid, "count offset grid (ma_lasso, appC2)");
    cmd->add_option("--scheme", pipe_opt.scheme, "ma_lasso penalty scheme: eq5 | appC2");
    cmd->add_option("--n-estimators", pipe_opt.n_estimators, "ensemble size (0 = default)");
    cmd->add_option("--min-samples-split", pipe_opt.min_samples_split,
                    "minimum node size to split");
    cmd->add_option("--grid-samples", pipe_opt.grid_samples,
                    "random grid subsample size (0 = exhaustive)");
  };

  auto* train = app.add_subcommand("train", "split, cross-validate, select, refit, evaluate");
  add_data_options(train, data_opt);
  add_pipeline_options(train);
  train->add_option("--selection", pipe_opt.selection, "alpha_star | alpha_zero | alpha_inf");
  train->add_option("--out", outdir, "output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "grid evaluation over repeated splits");
  add_data_options(sweep_cmd, data_opt);
  add_pipeline_options(sweep_cmd);
  sweep_cmd->add_option("--splits", splits, "number of repeated splits");
  sweep_cmd->add_option("--out", out_csv, "output CSV path");

  std::string synth_spec = "clinic", synth_out = "synth.csv";
  int synth_n = 1000;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "generate data from an ODDC process");
  synth->add_option("--spec", synth_spec, "'clinic' or a process spec JSON path");
  synth->add_option("--n", synth_n, "rows");
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("--out", synth_out, "output CSV path");

  std::string mechanism = "mcar", inject_out = "injected.csv";
  double rate = 0.5, feature_fraction = 1.0;
  std::uint64_t inject_seed = 0;
  auto* inject = app.add_subcommand("inject", "add synthetic missingness to a dataset");
  add_data_options(inject, data_opt);
  inject->add_option("--mechanism", mechanism, "mcar | mar | mnar");
  inject->add_option("--rate", rate, "marginal masking rate");
  inject->add_option("--feature-fraction", feature_fraction, "fraction of features to mask");
  inject->add_option("--seed", inject_seed, "seed");
  inject->add_option("--out", inject_out, "output CSV path");

  std::string model_path, format = "text", inspect_out;
  auto* inspect = app.add_subcommand("inspect", "render a stored model");
  inspect->add_option("--model", model_path, "model JSON path")->required();
  inspect->add_option("--format", format, "json | dot | text");
  add_data_options(inspect, data_opt);
  inspect->add_option("--out", inspect_out, "output file or directory (default: stdout)");

  std::string verify_model, verify_spec = "clinic";
  int verify_n = 10000;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify-oddc", "check rule satisfaction and zero reliance");
  verify->add_option("--model", verify_model, "tree model JSON path")->required();
  verify->add_option("--spec", verify_spec, "'clinic' or a process spec JSON path");
  verify->add_option("--n", verify_n, "fresh samples to check");
  verify->add_option("--seed", verify_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) return run_train(data_opt, pipe_opt, outdir);
    if (sweep_cmd->parsed()) return run_sweep(data_opt, pipe_opt, splits, out_csv);
    if (synth->parsed()) return run_synth(synth_spec, synth_n, synth_seed, synth_out);
    if (inject->parsed())
      return run_inject(data_opt, mechanism, rate, feature_fraction, inject_seed, inject_out);
    if (inspect->parsed()) return run_inspect(model_path, format, data_opt, inspect_out);
    if (verify->parsed()) return run_verify(verify_model, verify_spec, verify_n, verify_seed);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PropertyViolation& e) {
    std::cerr << "violation: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const MetricError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
