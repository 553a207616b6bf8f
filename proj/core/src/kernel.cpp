#include "saabo/kernel.hpp"

#include "saabo/errors.hpp"

#include <cmath>

namespace saabo {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964;

inline double matern_from_r2(double r2, double s) {
  const double r = std::sqrt(r2);
  return s * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2) * std::exp(-kSqrt5 * r);
}

// d k / d(x1_k) = factor · (x1_k − x2_k) / ℓ_k²,  factor = −(5/3)·s·(1 + √5 r)·exp(−√5 r)
inline double matern_grad_factor(double r2, double s) {
  const double r = std::sqrt(r2);
  return -(5.0 / 3.0) * s * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
}

}  // namespace

void KernelParams::validate(Eigen::Index d) const {
  if (lengthscales.size() != d) throw ConfigError("kernel: lengthscales length must equal input dimension");
  if (!(lengthscales.array() > 0.0).all() || !lengthscales.allFinite()) {
    throw ConfigError("kernel: lengthscales must be positive and finite");
  }
  if (!(outputscale > 0.0) || !std::isfinite(outputscale)) throw ConfigError("kernel: outputscale must be positive");
  if (!(noise_var_hom > 0.0) || !std::isfinite(noise_var_hom)) throw ConfigError("kernel: noise variance must be positive");
  if (!std::isfinite(mean_const)) throw ConfigError("kernel: mean constant must be finite");
}

double kernel_eval(const Eigen::Ref<const VectorXd>& x1, const Eigen::Ref<const VectorXd>& x2,
                   const KernelParams& params) {
  if (x1.size() != x2.size() || x1.size() != params.lengthscales.size()) {
    throw ShapeError("kernel_eval: dimension mismatch");
  }
  if (!x1.allFinite() || !x2.allFinite()) throw DomainError("kernel_eval: non-finite input");
  if (!(params.lengthscales.array() > 0.0).all()) throw ConfigError("kernel_eval: lengthscales must be positive");
  const double r2 = ((x1 - x2).array() / params.lengthscales.array()).square().sum();
  return matern_from_r2(r2, params.outputscale);
}

Matern52::Matern52(const KernelParams& params)
    : params_(params), inv_ls2_(params.lengthscales.array().square().inverse()) {}

MatrixXd Matern52::matrix(const MatrixXd& A, const MatrixXd& B) const {
  MatrixXd K(A.rows(), B.rows());
  const Eigen::Index d = A.cols();
  for (Eigen::Index j = 0; j < B.rows(); ++j) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = A(i, k) - B(j, k);
        r2 += diff * diff * inv_ls2_(k);
      }
      K(i, j) = matern_from_r2(r2, params_.outputscale);
    }
  }
  return K;
}

void Matern52::accumulate_grad_first(const MatrixXd& A, const MatrixXd& B, const MatrixXd& G,
                                     MatrixXd& gA) const {
  const Eigen::Index d = A.cols();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      const double g = G(i, j);
      if (g == 0.0) continue;
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = A(i, k) - B(j, k);
        r2 += diff * diff * inv_ls2_(k);
      }
      const double f = g * matern_grad_factor(r2, params_.outputscale);
      for (Eigen::Index k = 0; k < d; ++k) {
        gA(i, k) += f * (A(i, k) - B(j, k)) * inv_ls2_(k);
      }
    }
  }
}

VectorXd Matern52::grad_first(const Eigen::Ref<const VectorXd>& a, const Eigen::Ref<const VectorXd>& b) const {
  const VectorXd diff = a - b;
  const double r2 = (diff.array().square() * inv_ls2_.array()).sum();
  return matern_grad_factor(r2, params_.outputscale) * (diff.array() * inv_ls2_.array()).matrix();
}

}  // namespace saabo
