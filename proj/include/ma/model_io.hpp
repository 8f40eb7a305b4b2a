#pragma once

#include "ma/eval.hpp"
#include "ma/model.hpp"
#include "ma/oddc.hpp"
#include "ma/reliance.hpp"

#include <json.hpp>

#include <string>

namespace ma {

using json = nlohmann::json;

json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const json& j);

json linear_to_json(const LinearModel& model);
LinearModel linear_from_json(const json& j);

json ensemble_to_json(const Ensemble& ens);
Ensemble ensemble_from_json(const json& j);

/// Flat model document with an "estimator" discriminator merged into the
/// class-specific schema.
json model_to_json(const Model& model);
Model model_from_json(const json& j);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

json reliance_report_to_json(const RelianceReport& report);
json evaluation_report_to_json(const EvaluationReport& report);
json hyperparams_to_json(const HyperParams& params);
HyperParams hyperparams_from_json(const json& j);
json selection_result_to_json(const SelectionResult& result);

json process_to_json(const OddcProcess& process);
OddcProcess process_from_json(const json& j);

/// Graphviz rendering. Internal nodes read "name <= tau"; leaves show value
/// and training count. With data given, internal nodes are shaded by the
/// fraction of rows reaching them whose split feature is missing.
std::string tree_to_dot(const DecisionTree& tree, const std::vector<std::string>& feature_names,
                        const MatrixXd* x = nullptr, const MaskMatrix* mask = nullptr);

}  // namespace ma
