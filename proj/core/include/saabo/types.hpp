#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace saabo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Axis-aligned box; lower(k) < upper(k) for every coordinate.
struct Bounds {
  VectorXd lower;
  VectorXd upper;

  Bounds() = default;
  Bounds(VectorXd lo, VectorXd hi);

  static Bounds unit_cube(Eigen::Index d);

  Eigen::Index dim() const { return lower.size(); }
  VectorXd range() const { return upper - lower; }
  bool contains(const Eigen::Ref<const VectorXd>& x) const;
  /// Clamp every row of `X` into the box.
  MatrixXd project(const MatrixXd& X) const;
  /// Map points from [0,1]^d into the box, row-wise.
  MatrixXd from_unit(const MatrixXd& U) const;
};

/// SplitMix64 finalizer; used for seed derivation and counter-based streams.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive an independent child seed from a parent seed and a stream tag.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0,1) from counter `i` of the stream keyed by `seed`.
constexpr double hash_uniform(std::uint64_t seed, std::uint64_t i) {
  return static_cast<double>(mix64(seed ^ mix64(i)) >> 11) * 0x1.0p-53;
}

}  // namespace saabo
