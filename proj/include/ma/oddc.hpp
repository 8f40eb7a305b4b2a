#pragma once

#include "ma/common.hpp"
#include "ma/dataset.hpp"
#include "ma/tree.hpp"

#include <limits>
#include <string>
#include <vector>

namespace ma {

/// One-dimensional region with independently open or closed endpoints.
/// Threshold splits produce exactly these: x <= tau gives (-inf, tau],
/// x > tau gives (tau, +inf).
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_strict = true;   // x > lo; false means x >= lo
  bool hi_strict = false;  // x < hi when true, x <= hi otherwise

  bool contains(double v) const {
    const bool above = lo_strict ? v > lo : v >= lo;
    const bool below = hi_strict ? v < hi : v <= hi;
    return above && below;
  }
  bool subset_of(const Interval& other) const;
  static Interval at_most(double tau) { return {-std::numeric_limits<double>::infinity(), tau, true, false}; }
  static Interval greater_than(double tau) { return {tau, std::numeric_limits<double>::infinity(), true, false}; }
};

struct Constraint {
  int feature = -1;
  Interval interval;
};

/// Observed deterministic data collection rule (T, A, j): whenever the
/// antecedent features are observed with values in the box A, feature j is
/// observed. An empty antecedent marks a never-missing feature.
struct OddcRule {
  std::vector<Constraint> antecedent;
  int consequent = -1;
};

struct FeatureSpec {
  enum class Dist { uniform, uniform_int, normal, bernoulli, bernoulli_logistic };
  std::string name;
  Dist dist = Dist::uniform;
  double a = 0, b = 1;  // uniform lo/hi (inclusive ints for uniform_int), normal mean/sd, bernoulli p (in a)
  int parent = -1;      // bernoulli_logistic: p = sigmoid((x_parent - offset) / scale)
  double offset = 0, scale = 1;
  double baseline_missing = 0;  // masking rate outside rule-forced contexts
};

/// Complete-data label model: positive with probability p_in inside the
/// region (over complete values), p_out outside.
struct LabelSpec {
  std::vector<Constraint> region;
  double p_in = 0.9;
  double p_out = 0.1;
};

struct OddcProcess {
  std::vector<FeatureSpec> features;
  std::vector<OddcRule> rules;
  LabelSpec label;
  std::string label_name = "y";

  void validate() const;  // throws ConfigError on rule cycles or bad references
};

/// Samples complete features, applies baseline missingness everywhere except
/// cells forced observed by an active rule, and draws labels from the
/// complete values. Deterministic given seed.
Dataset generate(const OddcProcess& process, int n, std::uint64_t seed);

/// Same draw as generate, additionally returning the complete value matrix
/// (before masking) for oracle comparisons.
std::pair<Dataset, MatrixXd> generate_with_complete(const OddcProcess& process, int n,
                                                    std::uint64_t seed);

struct NodeCheck {
  int node = -1;
  bool satisfied = false;
  int rule = -1;        // index of the single rule that fired, if any
  bool by_union = false;  // satisfied only by a union of same-consequent rules
  bool incomplete = false;  // containment undecidable syntactically (fails closed)
};

struct OddcCheckReport {
  bool ok = false;
  std::vector<NodeCheck> nodes;  // one entry per internal node

  std::vector<int> violating_nodes() const {
    std::vector<int> out;
    for (const auto& nc : nodes)
      if (!nc.satisfied) out.push_back(nc.node);
    return out;
  }
};

/// Syntactic rule check: every internal node's ancestor split constraints
/// must imply the antecedent of a rule observing the node's feature. Each
/// rule is tried independently; one-dimensional same-consequent rule unions
/// are also tried, and anything beyond that is reported as incomplete
/// rather than passed. reference_data fixes the feature space arity.
OddcCheckReport check_tree(const DecisionTree& tree, const std::vector<OddcRule>& rules,
                           const Dataset& reference_data);

struct Prop1Report {
  int checked = 0;
  std::vector<std::pair<int, std::vector<int>>> violations;  // (row, decision path)

  bool ok() const { return violations.empty(); }
};

/// Generates n_check fresh samples from the process and verifies the tree's
/// empirical reliance is exactly zero.
Prop1Report verify_prop1(const DecisionTree& tree, const OddcProcess& process, int n_check,
                         std::uint64_t seed);

/// Built-in check-up cascade process: age always recorded, a screening test
/// guaranteed over age 65, a scan guaranteed after a positive test; the
/// label follows the scan inside that cascade.
OddcProcess clinic_process();

}  // namespace ma
