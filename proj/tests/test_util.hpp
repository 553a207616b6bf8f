#pragma once

#include "saabo/acquisition.hpp"
#include "saabo/gp_model.hpp"
#include "saabo/types.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>

namespace saabo::testing {

/// Small counter-based generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : seed_(seed) {}

  double uniform() { return hash_uniform(seed_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
  long integer(long lo, long hi) { return lo + static_cast<long>(uniform() * static_cast<double>(hi - lo + 1)); }
  MatrixXd uniform_matrix(Eigen::Index r, Eigen::Index c, double lo = 0.0, double hi = 1.0) {
    MatrixXd M(r, c);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = uniform(lo, hi);
    return M;
  }
  MatrixXd normal_matrix(Eigen::Index r, Eigen::Index c) {
    MatrixXd M(r, c);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = normal();
    return M;
  }
  std::uint64_t seed() { return mix64(seed_ ^ mix64(counter_++)); }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

inline double smooth_response(const VectorXd& x, int which) {
  double v = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    v += std::sin(3.0 * x(k) + 0.7 * which + static_cast<double>(k)) + 0.5 * x(k) * x(k);
  }
  return v;
}

inline KernelParams random_params(Gen& g, Eigen::Index d, double noise_lo = 1e-4, double noise_hi = 1e-2) {
  KernelParams p;
  p.lengthscales = VectorXd(d);
  for (Eigen::Index k = 0; k < d; ++k) p.lengthscales(k) = g.uniform(0.2, 1.0);
  p.outputscale = g.uniform(0.5, 2.0);
  p.mean_const = g.uniform(-0.5, 0.5);
  p.noise_var_hom = std::exp(g.uniform(std::log(noise_lo), std::log(noise_hi)));
  return p;
}

/// Model list with m independent outputs over n random points in [0,1]^d.
inline std::shared_ptr<const ModelList> random_model(Gen& g, Eigen::Index n, Eigen::Index d, Eigen::Index m = 1,
                                                     double noise_lo = 1e-4, double noise_hi = 1e-2) {
  const MatrixXd X = g.uniform_matrix(n, d);
  std::vector<GPModel> models;
  for (Eigen::Index j = 0; j < m; ++j) {
    VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = smooth_response(X.row(i).transpose(), static_cast<int>(j)) + 0.05 * g.normal();
    models.emplace_back(Dataset(X, y), random_params(g, d, noise_lo, noise_hi));
  }
  return std::make_shared<const ModelList>(std::move(models));
}

/// Central finite differences of f at X.
inline MatrixXd fd_gradient(const std::function<double(const MatrixXd&)>& f, const MatrixXd& X, double h = 1e-5) {
  MatrixXd G(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
      MatrixXd a = X, b = X;
      a(i, k) += h;
      b(i, k) -= h;
      G(i, k) = (f(a) - f(b)) / (2.0 * h);
    }
  }
  return G;
}

/// ‖a − b‖∞ / max(‖b‖∞, floor).
inline double relative_error(const MatrixXd& a, const MatrixXd& b, double floor = 1e-6) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

}  // namespace saabo::testing
