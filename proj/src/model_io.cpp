#include "ma/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ma {

namespace {

json vector_to_json(const VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

VectorXd vector_from_json(const json& arr) {
  VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

json params_to_json(const TreeParams& p) {
  return {{"alpha", p.alpha},
          {"max_depth", p.max_depth},
          {"min_samples_split", p.min_samples_split},
          {"min_impurity_decrease", p.min_impurity_decrease},
          {"feature_subsample", p.feature_subsample},
          {"seed", p.seed}};
}

TreeParams params_from_json(const json& j) {
  TreeParams p;
  p.alpha = j.at("alpha").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.min_impurity_decrease = j.at("min_impurity_decrease").get<double>();
  p.feature_subsample = j.at("feature_subsample").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

}  // namespace

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& nd = tree.nodes[id];
    json n{{"id", id}, {"count", nd.count}};
    if (nd.is_leaf()) {
      n["value"] = nd.value;
    } else {
      n["feature"] = nd.feature;
      n["threshold"] = nd.threshold;
      n["left"] = nd.left;
      n["right"] = nd.right;
    }
    nodes.push_back(std::move(n));
  }
  return {{"nodes", std::move(nodes)},
          {"root", tree.root},
          {"params", params_to_json(tree.params)},
          {"task", tree.task == TreeTask::classify ? "classify" : "regress"}};
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree tree;
  tree.root = j.at("root").get<int>();
  tree.params = params_from_json(j.at("params"));
  tree.task = j.at("task").get<std::string>() == "regress" ? TreeTask::regress : TreeTask::classify;
  const auto& nodes = j.at("nodes");
  tree.nodes.resize(nodes.size());
  for (const auto& n : nodes) {
    const auto id = n.at("id").get<std::size_t>();
    if (id >= tree.nodes.size()) throw DataError("tree json: node id out of range");
    auto& nd = tree.nodes[id];
    nd.count = n.value("count", 0);
    if (n.contains("feature")) {
      nd.feature = n.at("feature").get<int>();
      nd.threshold = n.at("threshold").get<double>();
      nd.left = n.at("left").get<int>();
      nd.right = n.at("right").get<int>();
      if (nd.left < 0 || nd.right < 0 || nd.left >= static_cast<int>(tree.nodes.size()) ||
          nd.right >= static_cast<int>(tree.nodes.size()))
        throw DataError("tree json: child id out of range");
    } else {
      nd.value = n.at("value").get<double>();
    }
  }
  return tree;
}

json linear_to_json(const LinearModel& model) {
  return {{"theta", vector_to_json(model.theta)},
          {"intercept", model.intercept},
          {"penalty_weights", vector_to_json(model.penalty_weights)},
          {"scheme", to_string(model.scheme)},
          {"feature_names", model.feature_names},
          {"converged", model.converged}};
}

LinearModel linear_from_json(const json& j) {
  LinearModel m;
  m.theta = vector_from_json(j.at("theta"));
  m.intercept = j.at("intercept").get<double>();
  m.penalty_weights = vector_from_json(j.at("penalty_weights"));
  m.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.converged = j.at("converged").get<bool>();
  return m;
}

json ensemble_to_json(const Ensemble& ens) {
  json trees = json::array();
  for (const auto& t : ens.trees) trees.push_back(tree_to_json(t));
  return {{"kind", ens.kind == EnsembleKind::forest ? "forest" : "boosted"},
          {"base_score", ens.base_score},
          {"gamma", ens.learning_rate},
          {"trees", std::move(trees)},
          {"params", {{"feature_subsample", ens.feature_subsample}}},
          {"seed", ens.seed}};
}

Ensemble ensemble_from_json(const json& j) {
  Ensemble ens;
  ens.kind = j.at("kind").get<std::string>() == "forest" ? EnsembleKind::forest
                                                         : EnsembleKind::boosted;
  ens.base_score = j.at("base_score").get<double>();
  ens.learning_rate = j.at("gamma").get<double>();
  ens.feature_subsample = j.at("params").at("feature_subsample").get<double>();
  ens.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("trees")) ens.trees.push_back(tree_from_json(t));
  if (ens.trees.empty()) throw DataError("ensemble json: no trees");
  return ens;
}

json model_to_json(const Model& model) {
  json j;
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    j = linear_to_json(*linear);
  } else if (const auto* tree = std::get_if<DecisionTree>(&model)) {
    j = tree_to_json(*tree);
  } else {
    j = ensemble_to_json(std::get<Ensemble>(model));
  }
  j["estimator"] = estimator_name(model);
  return j;
}

Model model_from_json(const json& j) {
  const auto estimator = j.at("estimator").get<std::string>();
  if (estimator == "ma_lasso") return linear_from_json(j);
  if (estimator == "ma_dt") return tree_from_json(j);
  if (estimator == "ma_rf" || estimator == "ma_gbt") return ensemble_from_json(j);
  throw DataError("model json: unknown estimator '" + estimator + "'");
}

void save_model(const Model& model, const std::string& path) {
  write_atomic(path, model_to_json(model).dump(2) + "\n");
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
    return model_from_json(j);
  } catch (const json::exception& e) {
    throw DataError(path + ": model format error: " + e.what());
  }
}

json reliance_report_to_json(const RelianceReport& report) {
  return {{"rho_hat", report.rho_hat},
          {"per_feature_usage", vector_to_json(report.per_feature_usage)},
          {"n", report.n}};
}

json evaluation_report_to_json(const EvaluationReport& r) {
  return {{"auroc", r.auroc},
          {"auroc_ci", {r.auroc_lo, r.auroc_hi}},
          {"rho_hat", r.rho_hat},
          {"rho_ci", {r.rho_lo, r.rho_hi}},
          {"n_test", r.n_test},
          {"bootstrap_b", r.bootstrap_b},
          {"seed", r.seed}};
}

json hyperparams_to_json(const HyperParams& p) {
  return {{"estimator", p.estimator},
          {"alpha", p.alpha},
          {"max_depth", p.max_depth},
          {"min_samples_split", p.min_samples_split},
          {"n_estimators", p.n_estimators},
          {"learning_rate", p.learning_rate},
          {"lambda", p.lambda},
          {"beta", p.beta},
          {"scheme", to_string(p.scheme)},
          {"feature_subsample", p.feature_subsample},
          {"seed", p.seed}};
}

HyperParams hyperparams_from_json(const json& j) {
  HyperParams p;
  p.estimator = j.at("estimator").get<std::string>();
  p.alpha = j.at("alpha").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.n_estimators = j.at("n_estimators").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.lambda = j.at("lambda").get<double>();
  p.beta = j.at("beta").get<double>();
  p.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  p.feature_subsample = j.at("feature_subsample").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

json selection_result_to_json(const SelectionResult& result) {
  json candidates = json::array();
  for (const auto& c : result.candidates)
    candidates.push_back({{"params", hyperparams_to_json(c.params)},
                          {"cv_auroc", c.cv_auroc},
                          {"cv_rho", c.cv_rho}});
  return {{"candidates", std::move(candidates)},
          {"chosen", result.chosen},
          {"max_auroc", result.max_auroc},
          {"threshold", result.threshold},
          {"mode", to_string(result.mode)}};
}

namespace {

json interval_to_json(const Interval& iv) {
  json j;
  if (std::isfinite(iv.lo)) {
    j["lo"] = iv.lo;
    j["lo_strict"] = iv.lo_strict;
  }
  if (std::isfinite(iv.hi)) {
    j["hi"] = iv.hi;
    j["hi_strict"] = iv.hi_strict;
  }
  return j;
}

Interval interval_from_json(const json& j) {
  Interval iv;
  if (j.contains("lo")) {
    iv.lo = j.at("lo").get<double>();
    iv.lo_strict = j.value("lo_strict", true);
  }
  if (j.contains("hi")) {
    iv.hi = j.at("hi").get<double>();
    iv.hi_strict = j.value("hi_strict", false);
  }
  return iv;
}

json constraints_to_json(const std::vector<Constraint>& cs) {
  json arr = json::array();
  for (const auto& c : cs) {
    json j = interval_to_json(c.interval);
    j["feature"] = c.feature;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<Constraint> constraints_from_json(const json& arr) {
  std::vector<Constraint> out;
  for (const auto& j : arr) out.push_back({j.at("feature").get<int>(), interval_from_json(j)});
  return out;
}

}  // namespace

json process_to_json(const OddcProcess& process) {
  json features = json::array();
  for (const auto& f : process.features) {
    json j{{"name", f.name}, {"baseline_missing", f.baseline_missing}};
    switch (f.dist) {
      case FeatureSpec::Dist::uniform:
        j["dist"] = "uniform";
        j["lo"] = f.a;
        j["hi"] = f.b;
        break;
      case FeatureSpec::Dist::uniform_int:
        j["dist"] = "uniform_int";
        j["lo"] = f.a;
        j["hi"] = f.b;
        break;
      case FeatureSpec::Dist::normal:
        j["dist"] = "normal";
        j["mean"] = f.a;
        j["sd"] = f.b;
        break;
      case FeatureSpec::Dist::bernoulli:
        j["dist"] = "bernoulli";
        j["p"] = f.a;
        break;
      case FeatureSpec::Dist::bernoulli_logistic:
        j["dist"] = "bernoulli_logistic";
        j["parent"] = f.parent;
        j["offset"] = f.offset;
        j["scale"] = f.scale;
        break;
    }
    features.push_back(std::move(j));
  }
  json rules = json::array();
  for (const auto& r : process.rules)
    rules.push_back({{"antecedent", constraints_to_json(r.antecedent)},
                     {"consequent", r.consequent}});
  return {{"features", std::move(features)},
          {"rules", std::move(rules)},
          {"label",
           {{"name", process.label_name},
            {"region", constraints_to_json(process.label.region)},
            {"p_in", process.label.p_in},
            {"p_out", process.label.p_out}}}};
}

OddcProcess process_from_json(const json& j) {
  OddcProcess p;
  for (const auto& f : j.at("features")) {
    FeatureSpec spec;
    spec.name = f.at("name").get<std::string>();
    spec.baseline_missing = f.value("baseline_missing", 0.0);
    const auto dist = f.at("dist").get<std::string>();
    if (dist == "uniform") {
      spec.dist = FeatureSpec::Dist::uniform;
      spec.a = f.at("lo").get<double>();
      spec.b = f.at("hi").get<double>();
    } else if (dist == "uniform_int") {
      spec.dist = FeatureSpec::Dist::uniform_int;
      spec.a = f.at("lo").get<double>();
      spec.b = f.at("hi").get<double>();
    } else if (dist == "normal") {
      spec.dist = FeatureSpec::Dist::normal;
      spec.a = f.at("mean").get<double>();
      spec.b = f.at("sd").get<double>();
    } else if (dist == "bernoulli") {
      spec.dist = FeatureSpec::Dist::bernoulli;
      spec.a = f.at("p").get<double>();
    } else if (dist == "bernoulli_logistic") {
      spec.dist = FeatureSpec::Dist::bernoulli_logistic;
      spec.parent = f.at("parent").get<int>();
      spec.offset = f.at("offset").get<double>();
      spec.scale = f.at("scale").get<double>();
    } else {
      throw DataError("process json: unknown distribution '" + dist + "'");
    }
    p.features.push_back(std::move(spec));
  }
  for (const auto& r : j.at("rules"))
    p.rules.push_back({constraints_from_json(r.at("antecedent")), r.at("consequent").get<int>()});
  const auto& label = j.at("label");
  p.label_name = label.value("name", "y");
  p.label.region = constraints_from_json(label.at("region"));
  p.label.p_in = label.at("p_in").get<double>();
  p.label.p_out = label.at("p_out").get<double>();
  p.validate();
  return p;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string shade(double frac) {
  // white to orange ramp
  const int r = 255;
  const int g = 255 - static_cast<int>(std::lround(frac * (255 - 140)));
  const int b = 255 - static_cast<int>(std::lround(frac * 255));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string trim_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string tree_to_dot(const DecisionTree& tree, const std::vector<std::string>& feature_names,
                        const MatrixXd* x, const MaskMatrix* mask) {
  // Node-level missingness fraction: among rows reaching a node, how many
  // are missing its split feature.
  std::vector<double> missing_frac(tree.nodes.size(), 0.0);
  if (x && mask) {
    std::vector<int> reach(tree.nodes.size(), 0);
    std::vector<int> miss(tree.nodes.size(), 0);
    for (Eigen::Index i = 0; i < x->rows(); ++i) {
      int u = tree.root;
      while (true) {
        ++reach[u];
        if (tree.nodes[u].is_leaf()) break;
        const auto& nd = tree.nodes[u];
        if ((*mask)(i, nd.feature)) ++miss[u];
        u = (*x)(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
      }
    }
    for (std::size_t u = 0; u < tree.nodes.size(); ++u)
      if (reach[u] > 0) missing_frac[u] = static_cast<double>(miss[u]) / reach[u];
  }

  std::ostringstream out;
  out << "digraph tree {\n  node [shape=box, style=filled, fontname=\"Helvetica\"];\n";
  for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
    const auto& nd = tree.nodes[u];
    if (nd.is_leaf()) {
      out << "  n" << u << " [label=\"" << trim_number(nd.value) << "\\nn=" << nd.count
          << "\", fillcolor=\"#f0f0f0\"];\n";
    } else {
      const std::string name = nd.feature < static_cast<int>(feature_names.size())
                                   ? feature_names[nd.feature]
                                   : "x" + std::to_string(nd.feature);
      out << "  n" << u << " [label=\"" << dot_escape(name) << " <= " << trim_number(nd.threshold)
          << "\", fillcolor=\"" << shade(x && mask ? missing_frac[u] : 0.0) << "\"];\n";
    }
  }
  for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
    const auto& nd = tree.nodes[u];
    if (nd.is_leaf()) continue;
    out << "  n" << u << " -> n" << nd.left << " [label=\"yes\"];\n";
    out << "  n" << u << " -> n" << nd.right << " [label=\"no\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ma
