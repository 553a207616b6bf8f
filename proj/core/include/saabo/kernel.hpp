#pragma once

#include "saabo/types.hpp"

namespace saabo {

/// Hyperparameters of the ARD Matérn-5/2 kernel with constant mean.
/// All values are in the original (user) units of inputs and outputs.
struct KernelParams {
  VectorXd lengthscales;       ///< one positive entry per input dimension
  double outputscale = 1.0;    ///< signal variance, k(x, x)
  double mean_const = 0.0;     ///< constant prior mean
  double noise_var_hom = 1e-4; ///< homoskedastic noise; ignored with fixed per-point noise

  /// Throws ConfigError unless every positive field is strictly positive
  /// and there are `d` lengthscales.
  void validate(Eigen::Index d) const;
};

/// k(x1, x2) = s·(1 + √5 r + 5r²/3)·exp(−√5 r), r² = Σ_k ((x1_k − x2_k)/ℓ_k)².
double kernel_eval(const Eigen::Ref<const VectorXd>& x1, const Eigen::Ref<const VectorXd>& x2,
                   const KernelParams& params);

/// Stateless helpers over row-stacked point sets.
class Matern52 {
 public:
  explicit Matern52(const KernelParams& params);

  const KernelParams& params() const { return params_; }

  /// |A|×|B| covariance matrix.
  MatrixXd matrix(const MatrixXd& A, const MatrixXd& B) const;

  /// Accumulate into gA the gradient of Σ_ij G_ij·k(A_i, B_j) with respect to
  /// the rows of A (the first argument).
  void accumulate_grad_first(const MatrixXd& A, const MatrixXd& B, const MatrixXd& G,
                             MatrixXd& gA) const;

  /// ∂k(a, b)/∂a for a single pair.
  VectorXd grad_first(const Eigen::Ref<const VectorXd>& a, const Eigen::Ref<const VectorXd>& b) const;

 private:
  KernelParams params_;
  VectorXd inv_ls2_;
};

}  // namespace saabo
