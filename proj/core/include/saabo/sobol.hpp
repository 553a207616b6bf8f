#pragma once

#include "saabo/types.hpp"

#include <cstdint>
#include <string>

namespace saabo {

/// Largest dimension covered by the vendored direction numbers.
inline constexpr int kMaxSobolDimension = 1111;

/// Path of the direction-number table: $SAABO_SOBOL_TABLE if set, else the
/// copy in the source tree, else the installed copy.
std::string sobol_table_path();

/// Raw 32-bit Sobol integer for dimension `dim` (0-based) at sequence index
/// `index`, where index 0 is the origin.
std::uint32_t sobol_integer(int dim, std::uint64_t index);

/// Nested-uniform base-2 scramble of a 32-bit Sobol integer. Each output bit is
/// the input bit XOR a hash of (key, bit position, all higher input bits); the
/// digits below 2^-32 are filled with hashed uniform bits. Result is in (0,1).
double scramble_digits(std::uint32_t x, std::uint64_t key);

/// Sobol low-discrepancy stream over [0,1)^s.
///
/// With scramble_seed = 0 the stream is the plain Joe–Kuo sequence starting
/// after the origin (0.5, 0.25, 0.75, ... in dimension 1). With a non-zero
/// seed every coordinate is scrambled and the stream starts at index 0, so
/// any prefix of length 2^k keeps the (t,k,s)-net structure.
/// Engines are single-owner; give each consumer its own.
class SobolEngine {
 public:
  explicit SobolEngine(int dimension, std::uint64_t scramble_seed = 0);

  int dimension() const { return dim_; }
  std::uint64_t scramble_seed() const { return seed_; }
  /// Number of points drawn so far.
  std::uint64_t index() const { return drawn_; }

  /// Next n points as an n×s matrix; advances the engine by n.
  MatrixXd draw(Eigen::Index n);
  void fast_forward(std::uint64_t n) { drawn_ += n; }
  void reset() { drawn_ = 0; }

 private:
  int dim_;
  std::uint64_t seed_;
  std::uint64_t drawn_ = 0;
};

}  // namespace saabo
