#pragma once

#include "saabo/gp_model.hpp"
#include "saabo/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace saabo {

enum class SampleMode { iid, rqmc };

std::string to_string(SampleMode mode);
/// "iid" or "rqmc"; throws ConfigError otherwise.
SampleMode parse_sample_mode(const std::string& name);

/// Fixed standard-normal base samples, N rows by D columns. Immutable.
class BaseSampleSet {
 public:
  BaseSampleSet() = default;
  BaseSampleSet(MatrixXd E, SampleMode source, std::uint64_t seed)
      : E_(std::move(E)), source_(source), seed_(seed) {}

  const MatrixXd& E() const { return E_; }
  SampleMode source() const { return source_; }
  std::uint64_t seed() const { return seed_; }
  Eigen::Index num_samples() const { return E_.rows(); }
  Eigen::Index dim() const { return E_.cols(); }
  bool empty() const { return E_.size() == 0; }

 private:
  MatrixXd E_;
  SampleMode source_ = SampleMode::rqmc;
  std::uint64_t seed_ = 0;
};

/// N×(q·m) standard normals. iid mode hashes (seed, row, column) counters;
/// rqmc mode maps a scrambled Sobol stream through Φ⁻¹. Columns are nested:
/// the first k columns do not depend on q·m.
BaseSampleSet draw_base_samples(SampleMode mode, std::uint64_t seed, Eigen::Index N, Eigen::Index q,
                                Eigen::Index m = 1);

/// How to draw base samples for a given candidate-set size.
struct SamplerSpec {
  SampleMode mode = SampleMode::rqmc;
  std::uint64_t seed = 0;
  Eigen::Index num_samples = 128;

  BaseSampleSet draw(Eigen::Index q, Eigen::Index m = 1) const {
    return draw_base_samples(mode, seed, num_samples, q, m);
  }
};

/// Sizes m·b^k for 1 ≤ m ≤ M and 0 ≤ k ≤ k_max, sorted and unique.
struct SampleSizeSchedule {
  int base = 2;
  int M = 1;
  int k_max = 0;
};
std::vector<long long> qmc_sample_sizes(const SampleSizeSchedule& schedule);

/// ξ^i = μ + L ε^i for every row of E; returns N×q.
MatrixXd reparameterize(const GaussianPosterior& posterior, const BaseSampleSet& base_samples);
/// Same with an already computed root L of the covariance.
MatrixXd reparameterize(const VectorXd& mean, const MatrixXd& root, const MatrixXd& E);

}  // namespace saabo
