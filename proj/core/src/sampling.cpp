#include "saabo/sampling.hpp"

#include "saabo/errors.hpp"
#include "saabo/linalg.hpp"
#include "saabo/normal.hpp"
#include "saabo/sobol.hpp"

#include <algorithm>
#include <set>

namespace saabo {

std::string to_string(SampleMode mode) {
  return mode == SampleMode::iid ? "iid" : "rqmc";
}

SampleMode parse_sample_mode(const std::string& name) {
  if (name == "iid") return SampleMode::iid;
  if (name == "rqmc") return SampleMode::rqmc;
  throw ConfigError("unknown sampler mode '" + name + "' (expected iid or rqmc)");
}

BaseSampleSet draw_base_samples(SampleMode mode, std::uint64_t seed, Eigen::Index N, Eigen::Index q,
                                Eigen::Index m) {
  if (N < 1) throw ConfigError("draw_base_samples: N must be ≥ 1");
  if (q < 1 || m < 1) throw ConfigError("draw_base_samples: q and m must be ≥ 1");
  const Eigen::Index D = q * m;
  MatrixXd E(N, D);
  if (mode == SampleMode::iid) {
    for (Eigen::Index j = 0; j < D; ++j) {
      const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(j));
      for (Eigen::Index i = 0; i < N; ++i) {
        const std::uint64_t bits = mix64(stream ^ mix64(static_cast<std::uint64_t>(i))) >> 11;
        E(i, j) = inverse_normal_cdf((static_cast<double>(bits) + 0.5) * 0x1.0p-53);
      }
    }
  } else {
    if (D > kMaxSobolDimension) {
      throw ConfigError("draw_base_samples: q·m = " + std::to_string(D) + " exceeds the Sobol dimension cap of " +
                        std::to_string(kMaxSobolDimension) + "; use iid mode");
    }
    std::uint64_t scramble = derive_seed(seed, 0x736f626fULL);
    if (scramble == 0) scramble = 1;
    SobolEngine engine(static_cast<int>(D), scramble);
    const MatrixXd U = engine.draw(N);
    E = U.unaryExpr([](double u) { return inverse_normal_cdf(u); });
  }
  return BaseSampleSet(std::move(E), mode, seed);
}

std::vector<long long> qmc_sample_sizes(const SampleSizeSchedule& s) {
  if (s.base < 2 || s.M < 1 || s.k_max < 0) throw ConfigError("qmc_sample_sizes: invalid schedule");
  std::set<long long> sizes;
  for (long long m = 1; m <= s.M; ++m) {
    long long p = 1;
    for (int k = 0; k <= s.k_max; ++k) {
      sizes.insert(m * p);
      p *= s.base;
    }
  }
  return {sizes.begin(), sizes.end()};
}

MatrixXd reparameterize(const VectorXd& mean, const MatrixXd& root, const MatrixXd& E) {
  if (E.cols() != mean.size() || root.rows() != mean.size()) {
    throw ShapeError("reparameterize: base samples have " + std::to_string(E.cols()) + " columns, posterior has " +
                     std::to_string(mean.size()) + " dimensions");
  }
  MatrixXd xi = E * root.transpose();
  xi.rowwise() += mean.transpose();
  return xi;
}

MatrixXd reparameterize(const GaussianPosterior& posterior, const BaseSampleSet& base_samples) {
  return reparameterize(posterior.mean, root_decomposition(posterior.cov), base_samples.E());
}

}  // namespace saabo
