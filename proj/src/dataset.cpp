#include "ma/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace ma {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  if (first == last) return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void Dataset::validate() const {
  const auto rows = values.rows();
  const auto cols = values.cols();
  if (static_cast<Eigen::Index>(columns.size()) != cols)
    throw DataError("dataset: column metadata arity does not match value matrix");
  if (mask.rows() != rows || mask.cols() != cols)
    throw DataError("dataset: mask shape does not match value matrix");
  if (labels.size() != rows) throw DataError("dataset: label length does not match row count");
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const bool na = std::isnan(values(i, j));
      if (na != (mask(i, j) == 1))
        throw DataError("dataset: mask/NaN mismatch at row " + std::to_string(i) + ", column " +
                        std::to_string(j));
    }
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0)
      throw DataError("dataset: non-binary label at row " + std::to_string(i));
  }
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  if (schema.label_column.empty()) throw ConfigError("load_csv: label column not named");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file, header row required");
  const auto header = split_line(line);

  int label_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (trim(header[j]) == schema.label_column) label_idx = static_cast<int>(j);
  }
  if (label_idx < 0)
    throw ConfigError("load_csv: label column '" + schema.label_column + "' not in header");

  const std::size_t arity = header.size();
  std::vector<std::vector<std::string>> raw;  // feature cells, row major
  std::vector<std::string> raw_labels;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() && in.eof()) break;
    auto cells = split_line(line);
    if (cells.size() != arity)
      throw DataError(path + ": parse error at row " + std::to_string(row_no) + ": expected " +
                      std::to_string(arity) + " cells, got " + std::to_string(cells.size()));
    raw_labels.push_back(trim(cells[label_idx]));
    std::vector<std::string> feats;
    feats.reserve(arity - 1);
    for (std::size_t j = 0; j < arity; ++j) {
      if (static_cast<int>(j) != label_idx) feats.push_back(trim(cells[j]));
    }
    raw.push_back(std::move(feats));
  }

  const auto n = static_cast<Eigen::Index>(raw.size());
  const auto d = static_cast<Eigen::Index>(arity - 1);

  Dataset ds;
  ds.label_name = schema.label_column;
  ds.columns.reserve(d);
  for (std::size_t j = 0; j < arity; ++j) {
    if (static_cast<int>(j) != label_idx) ds.columns.push_back({trim(header[j]), ColumnKind::numeric, {}});
  }

  // Kind inference: a column is numeric when every observed cell parses as a
  // number, unless overridden by the schema.
  for (Eigen::Index j = 0; j < d; ++j) {
    bool all_numeric = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& cell = raw[i][j];
      if (schema.na_tokens.count(cell)) continue;
      double v;
      if (!parse_double(cell, v)) {
        all_numeric = false;
        break;
      }
    }
    ds.columns[j].kind = all_numeric ? ColumnKind::numeric : ColumnKind::categorical;
  }
  for (const auto& [name, kind] : schema.kind_overrides) {
    bool found = false;
    for (auto& col : ds.columns) {
      if (col.name == name) {
        col.kind = kind;
        found = true;
      }
    }
    if (!found) throw ConfigError("load_csv: kind override for unknown column '" + name + "'");
  }

  ds.values.resize(n, d);
  ds.mask.resize(n, d);
  ds.labels.resize(n);

  for (Eigen::Index j = 0; j < d; ++j) {
    auto& col = ds.columns[j];
    std::unordered_map<std::string, int> vocab;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& cell = raw[i][j];
      if (schema.na_tokens.count(cell)) {
        ds.values(i, j) = kNaN;
        ds.mask(i, j) = 1;
        continue;
      }
      ds.mask(i, j) = 0;
      if (col.kind == ColumnKind::numeric) {
        double v;
        if (!parse_double(cell, v))
          throw DataError(path + ": non-numeric cell '" + cell + "' in numeric column '" +
                          col.name + "' at row " + std::to_string(i + 1));
        ds.values(i, j) = v;
      } else {
        auto it = vocab.find(cell);
        if (it == vocab.end()) {
          it = vocab.emplace(cell, static_cast<int>(col.categories.size())).first;
          col.categories.push_back(cell);
        }
        ds.values(i, j) = static_cast<double>(it->second);
      }
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& cell = raw_labels[i];
    if (schema.na_tokens.count(cell))
      throw DataError(path + ": schema error: label column contains NA at row " +
                      std::to_string(i + 1));
    double v;
    if (!parse_double(cell, v) || (v != 0.0 && v != 1.0))
      throw DataError(path + ": schema error: non-binary label '" + cell + "' at row " +
                      std::to_string(i + 1));
    ds.labels[i] = v;
  }

  ds.validate();
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ostringstream out;
  for (const auto& col : ds.columns) out << col.name << ',';
  out << ds.label_name << '\n';
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.d(); ++j) {
      if (ds.mask(i, j)) {
        out << ',';
        continue;
      }
      const auto& col = ds.columns[j];
      if (col.kind == ColumnKind::categorical)
        out << col.categories[static_cast<int>(ds.values(i, j))];
      else
        out << format_double(ds.values(i, j));
      out << ',';
    }
    out << format_double(ds.labels[i]) << '\n';
  }
  write_atomic(path, out.str());
}

Dataset subset(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.columns = ds.columns;
  out.label_name = ds.label_name;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.values.resize(m, ds.d());
  out.mask.resize(m, ds.d());
  out.labels.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (rows[i] < 0 || rows[i] >= ds.n()) throw ContractError("subset: row index out of range");
    out.values.row(i) = ds.values.row(rows[i]);
    out.mask.row(i) = ds.mask.row(rows[i]);
    out.labels[i] = ds.labels[rows[i]];
  }
  out.validate();
  return out;
}

Encoding fit_encoding(const Dataset& ds, bool standardize) {
  ds.validate();
  Encoding enc;
  enc.source_columns = ds.columns;
  for (Eigen::Index j = 0; j < ds.d(); ++j) {
    const auto& col = ds.columns[j];
    if (col.kind == ColumnKind::numeric) {
      enc.feature_names.push_back(col.name);
      enc.source_of.push_back(static_cast<int>(j));
      enc.category_of.push_back(-1);
    } else {
      for (std::size_t c = 0; c < col.categories.size(); ++c) {
        enc.feature_names.push_back(col.name + "=" + col.categories[c]);
        enc.source_of.push_back(static_cast<int>(j));
        enc.category_of.push_back(static_cast<int>(c));
      }
    }
  }

  const auto dprime = static_cast<Eigen::Index>(enc.feature_names.size());
  enc.standardization.enabled = standardize;
  enc.standardization.mean = VectorXd::Zero(dprime);
  enc.standardization.stddev = VectorXd::Ones(dprime);
  enc.standardization.clamped.assign(dprime, 0);
  if (standardize) {
    for (Eigen::Index f = 0; f < dprime; ++f) {
      if (enc.category_of[f] >= 0) continue;  // indicators stay 0/1
      const int j = enc.source_of[f];
      double sum = 0, sumsq = 0;
      Eigen::Index count = 0;
      for (Eigen::Index i = 0; i < ds.n(); ++i) {
        if (ds.mask(i, j)) continue;
        sum += ds.values(i, j);
        sumsq += ds.values(i, j) * ds.values(i, j);
        ++count;
      }
      if (count == 0) continue;  // fully missing column, leave identity scaling
      const double mean = sum / static_cast<double>(count);
      double var = sumsq / static_cast<double>(count) - mean * mean;
      if (var < 0) var = 0;
      double sd = std::sqrt(var);
      if (sd < 1e-12) {
        sd = 1.0;
        enc.standardization.clamped[f] = 1;
      }
      enc.standardization.mean[f] = mean;
      enc.standardization.stddev[f] = sd;
    }
  }
  return enc;
}

EncodedDataset apply_encoding(const Dataset& ds, const Encoding& enc) {
  ds.validate();
  if (ds.columns.size() != enc.source_columns.size())
    throw ContractError("apply_encoding: column arity mismatch");
  const auto dprime = static_cast<Eigen::Index>(enc.feature_names.size());
  EncodedDataset out;
  out.encoding = enc;
  out.x.resize(ds.n(), dprime);
  out.mask.resize(ds.n(), dprime);
  out.labels = ds.labels;

  for (Eigen::Index f = 0; f < dprime; ++f) {
    const int j = enc.source_of[f];
    const int cat = enc.category_of[f];
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (ds.mask(i, j)) {
        out.x(i, f) = kNaN;
        out.mask(i, f) = 1;
        continue;
      }
      out.mask(i, f) = 0;
      if (cat < 0) {
        const auto& st = enc.standardization;
        out.x(i, f) = st.enabled ? (ds.values(i, j) - st.mean[f]) / st.stddev[f] : ds.values(i, j);
      } else {
        // Unseen categories at apply time fall outside the vocabulary and
        // produce an all-zero group.
        out.x(i, f) = (static_cast<int>(ds.values(i, j)) == cat) ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

EncodedDataset encode(const Dataset& ds, bool standardize) {
  return apply_encoding(ds, fit_encoding(ds, standardize));
}

std::optional<std::string> decode_onehot(const EncodedDataset& enc, Eigen::Index row,
                                         int source_column) {
  const auto& e = enc.encoding;
  if (source_column < 0 || source_column >= static_cast<int>(e.source_columns.size()))
    throw ContractError("decode_onehot: bad source column");
  const auto& col = e.source_columns[source_column];
  if (col.kind != ColumnKind::categorical)
    throw ContractError("decode_onehot: column is not categorical");
  for (std::size_t f = 0; f < e.source_of.size(); ++f) {
    if (e.source_of[f] != source_column) continue;
    if (enc.mask(row, static_cast<Eigen::Index>(f))) return std::nullopt;
    if (enc.x(row, static_cast<Eigen::Index>(f)) == 1.0) return col.categories[e.category_of[f]];
  }
  return std::nullopt;  // all-zero group (unseen category)
}

ImputeStats fit_impute(const EncodedDataset& ds, ImputeStrategy strategy) {
  const auto d = ds.d();
  ImputeStats stats;
  stats.strategy = strategy;
  stats.fill = VectorXd::Zero(d);
  if (strategy == ImputeStrategy::zero) return stats;

  // mean for numeric features; for indicator groups, the training mode
  // pattern (1 on the most frequent category, 0 elsewhere).
  const auto& enc = ds.encoding;
  for (Eigen::Index f = 0; f < d; ++f) {
    if (enc.category_of[f] >= 0) continue;
    double sum = 0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (!ds.mask(i, f)) {
        sum += ds.x(i, f);
        ++count;
      }
    }
    stats.fill[f] = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }
  for (std::size_t j = 0; j < enc.source_columns.size(); ++j) {
    if (enc.source_columns[j].kind != ColumnKind::categorical) continue;
    int best_f = -1;
    double best_count = -1;
    for (std::size_t f = 0; f < enc.source_of.size(); ++f) {
      if (enc.source_of[f] != static_cast<int>(j)) continue;
      double count = 0;
      for (Eigen::Index i = 0; i < ds.n(); ++i) {
        if (!ds.mask(i, static_cast<Eigen::Index>(f)) && ds.x(i, static_cast<Eigen::Index>(f)) == 1.0)
          ++count;
      }
      if (count > best_count) {
        best_count = count;
        best_f = static_cast<int>(f);
      }
    }
    for (std::size_t f = 0; f < enc.source_of.size(); ++f) {
      if (enc.source_of[f] == static_cast<int>(j))
        stats.fill[static_cast<Eigen::Index>(f)] = (static_cast<int>(f) == best_f) ? 1.0 : 0.0;
    }
  }
  return stats;
}

ImputedDataset apply_impute(const EncodedDataset& ds, const ImputeStats& stats) {
  if (stats.fill.size() != ds.d()) throw ContractError("apply_impute: statistics arity mismatch");
  ImputedDataset out;
  out.x = ds.x;
  out.mask = ds.mask;
  out.labels = ds.labels;
  out.feature_names = ds.encoding.feature_names;
  out.stats = stats;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.d(); ++j) {
      if (ds.mask(i, j)) out.x(i, j) = stats.fill[j];
    }
  }
  return out;
}

ImputedDataset impute(const EncodedDataset& ds, ImputeStrategy strategy) {
  return apply_impute(ds, fit_impute(ds, strategy));
}

Mechanism mechanism_from_string(const std::string& s) {
  if (s == "mcar" || s == "MCAR") return Mechanism::mcar;
  if (s == "mar" || s == "MAR") return Mechanism::mar;
  if (s == "mnar" || s == "MNAR") return Mechanism::mnar;
  throw ConfigError("unknown missingness mechanism '" + s + "'");
}

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::mcar: return "mcar";
    case Mechanism::mar: return "mar";
    case Mechanism::mnar: return "mnar";
  }
  return "?";
}

namespace {

std::vector<int> sample_without_replacement(int pool, int k, std::mt19937_64& rng) {
  std::vector<int> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, pool - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Intercept of sigmoid(z + b) solving mean sigmoid(z_i + b) = rate, by
/// bisection. z entries must be finite.
double calibrate_intercept(const std::vector<double>& z, double rate) {
  auto mean_prob = [&](double b) {
    double s = 0;
    for (double v : z) s += sigmoid(v + b);
    return s / static_cast<double>(z.size());
  };
  double lo = -50, hi = 50;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_prob(mid) < rate)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Dataset inject_missingness(const Dataset& ds, Mechanism mechanism, double rate,
                           double feature_fraction, std::uint64_t seed) {
  if (rate < 0 || rate > 1) throw ConfigError("inject_missingness: rate must be in [0, 1]");
  if (feature_fraction <= 0 || feature_fraction > 1)
    throw ConfigError("inject_missingness: feature_fraction must be in (0, 1]");
  Dataset out = ds;
  if (rate == 0) return out;

  auto rng = make_rng(seed);
  const int d = static_cast<int>(ds.d());
  const int n_select = static_cast<int>(std::ceil(feature_fraction * d));

  std::vector<int> selected;
  if (mechanism == Mechanism::mnar) {
    std::vector<int> numeric_pool;
    for (int j = 0; j < d; ++j)
      if (ds.columns[j].kind == ColumnKind::numeric) numeric_pool.push_back(j);
    if (numeric_pool.empty())
      throw ConfigError("inject_missingness: MNAR needs numeric features (quantiles undefined)");
    if (n_select > static_cast<int>(numeric_pool.size()))
      throw ConfigError("inject_missingness: MNAR feature_fraction exceeds numeric feature count");
    auto picks = sample_without_replacement(static_cast<int>(numeric_pool.size()), n_select, rng);
    for (int p : picks) selected.push_back(numeric_pool[p]);
  } else {
    selected = sample_without_replacement(d, n_select, rng);
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);

  switch (mechanism) {
    case Mechanism::mcar: {
      for (int j : selected) {
        for (Eigen::Index i = 0; i < ds.n(); ++i) {
          if (unif(rng) < rate) {
            out.values(i, j) = kNaN;
            out.mask(i, j) = 1;
          }
        }
      }
      break;
    }
    case Mechanism::mar: {
      // Masking probability follows a logistic model on a randomly chosen
      // fully-observed numeric covariate outside the selected set; the
      // intercept is calibrated by bisection to hit the marginal rate.
      std::vector<int> covariates;
      for (int j = 0; j < d; ++j) {
        if (std::find(selected.begin(), selected.end(), j) != selected.end()) continue;
        if (ds.columns[j].kind != ColumnKind::numeric) continue;
        bool complete = true;
        for (Eigen::Index i = 0; i < ds.n(); ++i)
          if (ds.mask(i, j)) {
            complete = false;
            break;
          }
        if (complete) covariates.push_back(j);
      }
      if (covariates.empty())
        throw ConfigError("inject_missingness: MAR needs a fully-observed numeric feature");
      for (int j : selected) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(covariates.size()) - 1);
        const int cov = covariates[pick(rng)];
        std::vector<double> z(ds.n());
        double mean = 0, sq = 0;
        for (Eigen::Index i = 0; i < ds.n(); ++i) mean += ds.values(i, cov);
        mean /= static_cast<double>(ds.n());
        for (Eigen::Index i = 0; i < ds.n(); ++i) {
          const double c = ds.values(i, cov) - mean;
          sq += c * c;
        }
        const double sd = std::sqrt(sq / static_cast<double>(ds.n()));
        for (Eigen::Index i = 0; i < ds.n(); ++i)
          z[i] = sd > 1e-12 ? (ds.values(i, cov) - mean) / sd : 0.0;
        const double b = calibrate_intercept(z, rate);
        for (Eigen::Index i = 0; i < ds.n(); ++i) {
          if (unif(rng) < sigmoid(z[i] + b)) {
            out.values(i, j) = kNaN;
            out.mask(i, j) = 1;
          }
        }
      }
      break;
    }
    case Mechanism::mnar: {
      // Cells are maskable only below the 0.25 or above the 0.75 quantile of
      // their column; the within-region probability is scaled to hit the
      // marginal rate.
      for (int j : selected) {
        std::vector<double> observed;
        for (Eigen::Index i = 0; i < ds.n(); ++i)
          if (!ds.mask(i, j)) observed.push_back(ds.values(i, j));
        if (observed.empty()) continue;
        std::sort(observed.begin(), observed.end());
        const double q25 = quantile_sorted(observed, 0.25);
        const double q75 = quantile_sorted(observed, 0.75);
        std::vector<Eigen::Index> region;
        for (Eigen::Index i = 0; i < ds.n(); ++i) {
          if (ds.mask(i, j)) continue;
          const double v = ds.values(i, j);
          if (v < q25 || v > q75) region.push_back(i);
        }
        const double region_frac = static_cast<double>(region.size()) / static_cast<double>(ds.n());
        if (rate > region_frac + 1e-12)
          throw ConfigError(
              "inject_missingness: MNAR rate exceeds the tail-region fraction of column '" +
              ds.columns[j].name + "'");
        const double within = region.empty() ? 0.0 : rate / region_frac;
        for (Eigen::Index i : region) {
          if (unif(rng) < within) {
            out.values(i, j) = kNaN;
            out.mask(i, j) = 1;
          }
        }
      }
      break;
    }
  }
  out.validate();
  return out;
}

namespace {

/// Shuffled row indices of each label class.
std::array<std::vector<int>, 2> class_indices(const Dataset& ds, std::mt19937_64& rng) {
  std::array<std::vector<int>, 2> cls;
  for (Eigen::Index i = 0; i < ds.n(); ++i) cls[ds.labels[i] > 0.5 ? 1 : 0].push_back(static_cast<int>(i));
  for (auto& v : cls) std::shuffle(v.begin(), v.end(), rng);
  return cls;
}

}  // namespace

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  if (test_fraction <= 0 || test_fraction >= 1)
    throw ConfigError("train_test_split: test_fraction must be in (0, 1)");
  auto rng = make_rng(seed);
  auto cls = class_indices(ds, rng);
  std::vector<int> train, test;
  for (const auto& idx : cls) {
    const auto k = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < idx.size(); ++i) (i < k ? test : train).push_back(idx[i]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {subset(ds, train), subset(ds, test)};
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold(const Dataset& ds, int k,
                                                                 std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold: k must be at least 2");
  if (k > ds.n()) throw ConfigError("kfold: k exceeds the number of rows");
  auto rng = make_rng(seed);
  auto cls = class_indices(ds, rng);
  // Deal class-grouped indices cyclically, continuing the fold position
  // across classes so fold sizes stay within one of each other.
  std::vector<std::vector<int>> folds(k);
  int at = 0;
  for (const auto& idx : cls) {
    for (int i : idx) {
      folds[at % k].push_back(i);
      ++at;
    }
  }
  std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
  for (int f = 0; f < k; ++f) {
    std::vector<int> train, val = folds[f];
    for (int g = 0; g < k; ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    out.emplace_back(std::move(train), std::move(val));
  }
  return out;
}

}  // namespace ma
