#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ma {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Binary per-cell matrices (missingness masks, sigma weights). 1 = set.
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using SigmaWeights = MaskMatrix;

// Error taxonomy. ConfigError covers bad parameters and unusable
// configurations, DataError covers parse/schema/content problems,
// ContractError marks caller bugs, MetricError undefined or unstable
// statistics, PropertyViolation a failed verification.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};
struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PropertyViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kCoefficientZeroTol = 1e-12;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

/// Independent deterministic substream for (seed, index) pairs, used so
/// that parallel workers (forest trees, grid points) draw disjoint streams
/// regardless of scheduling order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~index)));
}

template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  return 1.0 / (1.0 + (-z).exp());
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Writes content through a temporary file and rename.
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

/// Linear-interpolation quantile of a sorted sample (same convention as the
/// usual type-7 estimator). q in [0, 1].
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ContractError("quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace ma
