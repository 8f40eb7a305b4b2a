#include "ma/oddc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace ma {

bool Interval::subset_of(const Interval& other) const {
  // Lower end: this must start at or above other's start; at equal bounds a
  // closed start fits inside an open one only if this is open too.
  const bool lower_ok =
      lo > other.lo || (lo == other.lo && (lo_strict || !other.lo_strict));
  const bool upper_ok =
      hi < other.hi || (hi == other.hi && (hi_strict || !other.hi_strict));
  return lower_ok && upper_ok;
}

void OddcProcess::validate() const {
  const int d = static_cast<int>(features.size());
  if (d == 0) throw ConfigError("oddc process: no features");
  for (int j = 0; j < d; ++j) {
    const auto& f = features[j];
    if (f.dist == FeatureSpec::Dist::bernoulli_logistic) {
      if (f.parent < 0 || f.parent >= j)
        throw ConfigError("oddc process: logistic feature '" + f.name +
                          "' must reference an earlier feature");
      if (f.scale == 0) throw ConfigError("oddc process: logistic scale must be nonzero");
    }
    if (f.baseline_missing < 0 || f.baseline_missing > 1)
      throw ConfigError("oddc process: baseline missingness must be in [0, 1]");
  }
  for (const auto& rule : rules) {
    if (rule.consequent < 0 || rule.consequent >= d)
      throw ConfigError("oddc process: rule consequent out of range");
    for (const auto& c : rule.antecedent) {
      if (c.feature < 0 || c.feature >= d)
        throw ConfigError("oddc process: rule antecedent feature out of range");
      if (c.feature == rule.consequent)
        throw ConfigError("oddc process: rule consequent appears in its own antecedent");
    }
  }
  // The mask of a consequent depends on the masks of its antecedents; a
  // cycle in that dependency graph makes generation ill-defined.
  std::vector<std::vector<int>> deps(d);
  for (const auto& rule : rules)
    for (const auto& c : rule.antecedent) deps[rule.consequent].push_back(c.feature);
  std::vector<int> state(d, 0);  // 0 new, 1 visiting, 2 done
  std::vector<int> stack;
  for (int start = 0; start < d; ++start) {
    if (state[start]) continue;
    stack.push_back(start);
    std::vector<std::pair<int, std::size_t>> dfs{{start, 0}};
    state[start] = 1;
    while (!dfs.empty()) {
      auto& [u, next] = dfs.back();
      if (next < deps[u].size()) {
        const int v = deps[u][next++];
        if (state[v] == 1)
          throw ConfigError("oddc process: rule cycle involving feature '" + features[v].name +
                            "'");
        if (state[v] == 0) {
          state[v] = 1;
          dfs.push_back({v, 0});
        }
      } else {
        state[u] = 2;
        dfs.pop_back();
      }
    }
  }
  for (const auto& c : label.region) {
    if (c.feature < 0 || c.feature >= d)
      throw ConfigError("oddc process: label region feature out of range");
  }
  if (label.p_in < 0 || label.p_in > 1 || label.p_out < 0 || label.p_out > 1)
    throw ConfigError("oddc process: label probabilities must be in [0, 1]");
}

namespace {

std::vector<int> mask_topo_order(const OddcProcess& process) {
  const int d = static_cast<int>(process.features.size());
  std::vector<std::vector<int>> fwd(d);
  std::vector<int> indegree(d, 0);
  for (const auto& rule : process.rules) {
    for (const auto& c : rule.antecedent) {
      fwd[c.feature].push_back(rule.consequent);
      ++indegree[rule.consequent];
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int j = 0; j < d; ++j)
    if (indegree[j] == 0) ready.push(j);
  std::vector<int> order;
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v : fwd[u])
      if (--indegree[v] == 0) ready.push(v);
  }
  return order;  // validate() already rejected cycles
}

bool in_region(const std::vector<Constraint>& region, const MatrixXd& values, Eigen::Index row) {
  for (const auto& c : region)
    if (!c.interval.contains(values(row, c.feature))) return false;
  return true;
}

}  // namespace

std::pair<Dataset, MatrixXd> generate_with_complete(const OddcProcess& process, int n,
                                                    std::uint64_t seed) {
  process.validate();
  const int d = static_cast<int>(process.features.size());
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  MatrixXd complete(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const auto& f = process.features[j];
      switch (f.dist) {
        case FeatureSpec::Dist::uniform: {
          std::uniform_real_distribution<double> u(f.a, f.b);
          complete(i, j) = u(rng);
          break;
        }
        case FeatureSpec::Dist::uniform_int: {
          std::uniform_int_distribution<long> u(static_cast<long>(f.a), static_cast<long>(f.b));
          complete(i, j) = static_cast<double>(u(rng));
          break;
        }
        case FeatureSpec::Dist::normal: {
          std::normal_distribution<double> g(f.a, f.b);
          complete(i, j) = g(rng);
          break;
        }
        case FeatureSpec::Dist::bernoulli:
          complete(i, j) = unif(rng) < f.a ? 1.0 : 0.0;
          break;
        case FeatureSpec::Dist::bernoulli_logistic: {
          const double p = sigmoid((complete(i, f.parent) - f.offset) / f.scale);
          complete(i, j) = unif(rng) < p ? 1.0 : 0.0;
          break;
        }
      }
    }
  }

  VectorXd labels(n);
  for (int i = 0; i < n; ++i) {
    const double p = in_region(process.label.region, complete, i) ? process.label.p_in
                                                                  : process.label.p_out;
    labels[i] = unif(rng) < p ? 1.0 : 0.0;
  }

  // Masks in rule dependency order so antecedent observedness is known when
  // a consequent's cell is decided.
  const auto order = mask_topo_order(process);
  MaskMatrix mask = MaskMatrix::Zero(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j : order) {
      bool forced = false;
      for (const auto& rule : process.rules) {
        if (rule.consequent != j) continue;
        bool active = true;
        for (const auto& c : rule.antecedent) {
          if (mask(i, c.feature) || !c.interval.contains(complete(i, c.feature))) {
            active = false;
            break;
          }
        }
        if (active) {
          forced = true;
          break;
        }
      }
      if (forced)
        mask(i, j) = 0;
      else
        mask(i, j) = unif(rng) < process.features[j].baseline_missing ? 1 : 0;
    }
  }

  Dataset ds;
  ds.label_name = process.label_name;
  for (const auto& f : process.features) ds.columns.push_back({f.name, ColumnKind::numeric, {}});
  ds.values = complete;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      if (mask(i, j)) ds.values(i, j) = std::numeric_limits<double>::quiet_NaN();
  ds.mask = mask;
  ds.labels = labels;
  ds.validate();
  return {std::move(ds), std::move(complete)};
}

Dataset generate(const OddcProcess& process, int n, std::uint64_t seed) {
  return generate_with_complete(process, n, seed).first;
}

namespace {

/// Does the union of the given intervals cover target? The frontier is a
/// point `at` together with whether that point itself still needs covering,
/// so mixed open/closed endpoints cannot hide a single-point gap.
bool union_covers(const Interval& target, std::vector<Interval> pieces) {
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && !a.lo_strict && b.lo_strict);
  });
  double at = target.lo;
  bool need_at = !target.lo_strict;  // closed target start must itself be covered
  for (const auto& p : pieces) {
    const bool attaches = p.lo < at || (p.lo == at && (!p.lo_strict || !need_at));
    if (!attaches) continue;
    const bool past = p.hi > at || (p.hi == at && need_at && !p.hi_strict);
    if (!past) continue;
    at = p.hi;
    need_at = p.hi_strict;
    const bool done = at > target.hi || (at == target.hi && (target.hi_strict || !need_at));
    if (done) return true;
  }
  return false;
}

}  // namespace

OddcCheckReport check_tree(const DecisionTree& tree, const std::vector<OddcRule>& rules,
                           const Dataset& reference_data) {
  const int d = static_cast<int>(reference_data.d());
  for (const auto& nd : tree.nodes)
    if (!nd.is_leaf() && (nd.feature < 0 || nd.feature >= d))
      throw ContractError("check_tree: tree feature outside the reference feature space");

  OddcCheckReport report;
  report.ok = true;

  struct Frame {
    int node;
    std::map<int, Interval> constraints;  // ancestor split constraints per feature
  };
  std::vector<Frame> stack{{tree.root, {}}};
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto& nd = tree.nodes[frame.node];
    if (nd.is_leaf()) continue;

    NodeCheck nc;
    nc.node = frame.node;

    auto implied = [&](const std::vector<Constraint>& antecedent) {
      for (const auto& c : antecedent) {
        auto it = frame.constraints.find(c.feature);
        if (it == frame.constraints.end() || !it->second.subset_of(c.interval)) return false;
      }
      return true;
    };

    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (rules[r].consequent != nd.feature) continue;
      if (implied(rules[r].antecedent)) {
        nc.satisfied = true;
        nc.rule = static_cast<int>(r);
        break;
      }
    }

    if (!nc.satisfied) {
      // Union fallback: same-consequent rules whose antecedents constrain a
      // single shared feature may jointly cover the ancestor interval.
      std::map<int, std::vector<Interval>> by_feature;
      bool saw_multidim = false;
      for (const auto& rule : rules) {
        if (rule.consequent != nd.feature) continue;
        if (rule.antecedent.size() == 1)
          by_feature[rule.antecedent.front().feature].push_back(rule.antecedent.front().interval);
        else if (!rule.antecedent.empty())
          saw_multidim = true;
      }
      for (const auto& [feature, regions] : by_feature) {
        auto it = frame.constraints.find(feature);
        if (it == frame.constraints.end()) continue;
        if (union_covers(it->second, regions)) {
          nc.satisfied = true;
          nc.by_union = true;
          break;
        }
      }
      if (!nc.satisfied && saw_multidim) nc.incomplete = true;
    }

    report.nodes.push_back(nc);
    report.ok = report.ok && nc.satisfied;

    auto push_child = [&](int child, const Interval& added) {
      Frame next{child, frame.constraints};
      auto [it, fresh] = next.constraints.emplace(nd.feature, added);
      if (!fresh) {
        auto& iv = it->second;
        if (added.lo > iv.lo || (added.lo == iv.lo && added.lo_strict)) {
          iv.lo = added.lo;
          iv.lo_strict = added.lo_strict;
        }
        if (added.hi < iv.hi || (added.hi == iv.hi && added.hi_strict)) {
          iv.hi = added.hi;
          iv.hi_strict = added.hi_strict;
        }
      }
      stack.push_back(std::move(next));
    };
    push_child(nd.left, Interval::at_most(nd.threshold));
    push_child(nd.right, Interval::greater_than(nd.threshold));
  }

  std::sort(report.nodes.begin(), report.nodes.end(),
            [](const NodeCheck& a, const NodeCheck& b) { return a.node < b.node; });
  return report;
}

Prop1Report verify_prop1(const DecisionTree& tree, const OddcProcess& process, int n_check,
                         std::uint64_t seed) {
  const auto ds = generate(process, n_check, seed);
  const auto imputed = impute(encode(ds, false), ImputeStrategy::zero);

  Prop1Report report;
  report.checked = n_check;
  for (Eigen::Index i = 0; i < imputed.n(); ++i) {
    int u = tree.root;
    bool reliant = false;
    while (!tree.nodes[u].is_leaf()) {
      const auto& nd = tree.nodes[u];
      if (imputed.mask(i, nd.feature)) reliant = true;
      u = imputed.x(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    if (reliant)
      report.violations.emplace_back(static_cast<int>(i),
                                     tree.decision_path(imputed.x.row(i).transpose()));
  }
  return report;
}

OddcProcess clinic_process() {
  OddcProcess p;
  p.features.resize(3);
  // Ages in whole years: the atoms at the rule boundary keep regularized
  // splits on the rule-compatible side of it at finite sample sizes.
  p.features[0] = {"age", FeatureSpec::Dist::uniform_int, 40, 90, -1, 0, 1, 0.0};
  p.features[1] = {"test_result", FeatureSpec::Dist::bernoulli_logistic, 0, 0, 0, 65, 5, 0.6};
  p.features[2] = {"scan_result", FeatureSpec::Dist::bernoulli, 0.5, 0, -1, 0, 1, 0.6};

  p.rules.push_back({{}, 0});  // age is never missing
  p.rules.push_back({{{0, Interval::greater_than(65)}}, 1});
  p.rules.push_back({{{1, Interval::greater_than(0.5)}}, 2});

  p.label.region = {{0, Interval::greater_than(65)},
                    {1, Interval::greater_than(0.5)},
                    {2, Interval::greater_than(0.5)}};
  p.label.p_in = 0.9;
  p.label.p_out = 0.1;
  p.label_name = "impaired";
  return p;
}

}  // namespace ma
