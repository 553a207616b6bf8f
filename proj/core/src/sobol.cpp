#include "saabo/sobol.hpp"

#include "saabo/errors.hpp"

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace saabo {

namespace {

using Directions = std::array<std::uint32_t, 32>;

std::vector<Directions> load_table() {
  const std::string path = sobol_table_path();
  std::ifstream in(path);
  if (!in) throw ConfigError("Sobol direction numbers not found at " + path);

  std::vector<Directions> table;
  table.reserve(kMaxSobolDimension);
  Directions first{};
  for (int k = 0; k < 32; ++k) first[k] = std::uint32_t{1} << (31 - k);
  table.push_back(first);

  std::string line;
  std::getline(in, line);  // header
  while (static_cast<int>(table.size()) < kMaxSobolDimension && std::getline(in, line)) {
    std::istringstream ls(line);
    unsigned dim = 0, s = 0, a = 0;
    if (!(ls >> dim >> s >> a)) continue;
    std::vector<std::uint32_t> m(s);
    for (unsigned i = 0; i < s; ++i) ls >> m[i];
    if (!ls || s == 0 || s > 32) throw ConfigError("malformed Sobol direction line: " + line);

    Directions v{};
    for (unsigned k = 0; k < 32; ++k) {
      if (k < s) {
        v[k] = m[k] << (31 - k);
      } else {
        std::uint32_t x = v[k - s] ^ (v[k - s] >> s);
        for (unsigned j = 1; j < s; ++j) {
          if ((a >> (s - 1 - j)) & 1u) x ^= v[k - j];
        }
        v[k] = x;
      }
    }
    table.push_back(v);
  }
  if (static_cast<int>(table.size()) < kMaxSobolDimension) {
    throw ConfigError("Sobol table " + path + " covers fewer than " + std::to_string(kMaxSobolDimension) +
                      " dimensions");
  }
  return table;
}

const std::vector<Directions>& table() {
  static const std::vector<Directions> t = load_table();
  return t;
}

}  // namespace

std::string sobol_table_path() {
  if (const char* env = std::getenv("SAABO_SOBOL_TABLE"); env && *env) return env;
  if (std::filesystem::exists(SAABO_SOBOL_TABLE_BUILD)) return SAABO_SOBOL_TABLE_BUILD;
  return SAABO_SOBOL_TABLE_INSTALL;
}

std::uint32_t sobol_integer(int dim, std::uint64_t index) {
  if (dim < 0 || dim >= kMaxSobolDimension) throw ConfigError("Sobol dimension out of range");
  if (index >= (std::uint64_t{1} << 32)) throw ConfigError("Sobol index exceeds 2^32");
  const Directions& v = table()[static_cast<std::size_t>(dim)];
  std::uint32_t x = 0;
  for (int k = 0; index != 0; ++k, index >>= 1) {
    if (index & 1u) x ^= v[static_cast<std::size_t>(k)];
  }
  return x;
}

double scramble_digits(std::uint32_t x, std::uint64_t key) {
  std::uint32_t out = 0;
  for (int b = 0; b < 32; ++b) {
    const std::uint64_t prefix = b == 0 ? 0 : (x >> (32 - b));
    const std::uint64_t h = mix64(key ^ mix64((static_cast<std::uint64_t>(b) << 32) | prefix));
    const std::uint32_t bit = ((x >> (31 - b)) & 1u) ^ static_cast<std::uint32_t>(h >> 63);
    out |= bit << (31 - b);
  }
  const std::uint64_t low = mix64(key ^ mix64((std::uint64_t{33} << 32) | x)) >> 43;  // 21 bits
  return (static_cast<double>((static_cast<std::uint64_t>(out) << 21) | low) + 0.5) * 0x1.0p-53;
}

SobolEngine::SobolEngine(int dimension, std::uint64_t scramble_seed)
    : dim_(dimension), seed_(scramble_seed) {
  if (dimension < 1) throw ConfigError("SobolEngine: dimension must be ≥ 1");
  if (dimension > kMaxSobolDimension) {
    throw ConfigError("SobolEngine: dimension " + std::to_string(dimension) + " exceeds the supported " +
                      std::to_string(kMaxSobolDimension) + "; use iid sampling instead");
  }
  table();
}

MatrixXd SobolEngine::draw(Eigen::Index n) {
  if (n < 1) throw ConfigError("SobolEngine::draw: n must be ≥ 1");
  MatrixXd P(n, dim_);
  const std::uint64_t offset = seed_ == 0 ? 1 : 0;
  for (int j = 0; j < dim_; ++j) {
    const std::uint64_t key = derive_seed(seed_, static_cast<std::uint64_t>(j));
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::uint32_t x = sobol_integer(j, drawn_ + offset + static_cast<std::uint64_t>(i));
      P(i, j) = seed_ == 0 ? static_cast<double>(x) * 0x1.0p-32 : scramble_digits(x, key);
    }
  }
  drawn_ += static_cast<std::uint64_t>(n);
  return P;
}

}  // namespace saabo
