#pragma once

#include "saabo/dataset.hpp"
#include "saabo/errors.hpp"
#include "saabo/kernel.hpp"
#include "saabo/types.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace saabo {

/// Joint normal posterior at q candidate points. With
/// `includes_observation_noise` the covariance is that of y_D(x) rather than f_D(x).
struct GaussianPosterior {
  VectorXd mean;
  MatrixXd cov;
  bool includes_observation_noise = false;

  Eigen::Index size() const { return mean.size(); }
};

/// Log evidence and its gradient with respect to the packed hyperparameter
/// vector [log ℓ_1..d, log outputscale, mean_const, (log noise)].
struct LmlResult {
  double value = 0.0;
  VectorXd grad;
};

/// Cross covariance K_D(A, B) of the posterior plus what its reverse pass needs.
struct CrossCovariance {
  MatrixXd value;  ///< |A|×|B|
  MatrixXd W_A;    ///< K_train⁻¹ K(T, A), n×|A|
  MatrixXd K_TB;   ///< K(T, B), n×|B|
};

/// Exact single-output GP regression with a Matérn-5/2 ARD kernel and a
/// constant mean. Immutable once built; all queries are const and thread-safe.
class GPModel {
 public:
  /// Factorizes K(X,X) + diag(noise). `data` must have exactly one output.
  /// Throws SingularKernelError when the jitter schedule is exhausted.
  GPModel(Dataset data, KernelParams params);

  const Dataset& dataset() const { return data_; }
  const KernelParams& params() const { return params_; }
  const Matern52& kernel() const { return kernel_; }
  Eigen::Index num_train() const { return data_.num_points(); }
  Eigen::Index dim() const { return data_.dim(); }

  /// Lower factor of K(X,X) + diag(noise) + diag(jitter).
  const MatrixXd& chol_train() const { return factor_->L; }
  /// Per-row jitter that was added to the training diagonal.
  const VectorXd& jitter() const { return factor_->jitter; }
  /// K_train⁻¹ (y − mean_const).
  const VectorXd& alpha() const { return alpha_; }

  /// Noise variances of the training observations.
  VectorXd train_noise() const;
  /// Observation noise variance assumed at a point that has not been observed:
  /// the fitted homoskedastic noise, or the mean of fixed training noise.
  double new_point_noise() const;

  GaussianPosterior posterior(const MatrixXd& X, bool observation_noise = false) const;
  VectorXd posterior_mean(const MatrixXd& X) const;
  VectorXd posterior_variance(const MatrixXd& X) const;
  CrossCovariance posterior_cross_cov(const MatrixXd& A, const MatrixXd& B) const;

  /// K_train⁻¹ · rhs.
  MatrixXd solve_train(const MatrixXd& rhs) const;
  /// K(T, X), n×|X|.
  MatrixXd train_cross(const MatrixXd& X) const;

  // Reverse-mode pieces. Each accumulates into the supplied gradient matrices.

  /// gX += ∂(gᵀ μ(X))/∂X.
  void mean_vjp(const MatrixXd& X, const VectorXd& g, MatrixXd& gX) const;
  /// Gradient of Σ_ij gC_ij·K_D(A,B)_ij. Pass nullptr to skip an argument.
  void cross_cov_vjp(const MatrixXd& A, const MatrixXd& B, const CrossCovariance& cc,
                     const MatrixXd& gC, MatrixXd* gA, MatrixXd* gB) const;
  /// gX += ∂(gᵀ var_D(X))/∂X, where W = K_train⁻¹ K(T, X).
  void variance_vjp(const MatrixXd& X, const MatrixXd& W, const VectorXd& g, MatrixXd& gX) const;

  /// Condition on observations Y (k×1) at X (k×d) with the current
  /// hyperparameters, extending the training factor by one block.
  GPModel condition_on_observations(const MatrixXd& X, const MatrixXd& Y) const;

  /// N fantasy models, fantasy i conditioned on (X, μ(X) + L^σ(X) εⁱ) where
  /// L^σ is a root of the posterior covariance including observation noise.
  /// All fantasies share one factor, so their covariances coincide exactly.
  std::vector<GPModel> fantasize(const MatrixXd& X, const MatrixXd& base_samples) const;

 private:
  struct Factor {
    MatrixXd L;
    VectorXd jitter;
  };

  GPModel(Dataset data, KernelParams params, std::shared_ptr<const Factor> factor, VectorXd alpha);

  void check_points(const MatrixXd& X) const;

  Dataset data_;
  KernelParams params_;
  Matern52 kernel_;
  std::shared_ptr<const Factor> factor_;
  VectorXd alpha_;
};

/// Independent per-output GPs over shared inputs.
class ModelList {
 public:
  ModelList() = default;
  explicit ModelList(GPModel model);
  explicit ModelList(std::vector<GPModel> models);

  std::size_t num_outputs() const { return models_.size(); }
  Eigen::Index dim() const { return models_.front()->dim(); }
  const GPModel& operator[](std::size_t j) const { return *models_[j]; }
  const GPModel& model(std::size_t j) const { return *models_.at(j); }
  /// Training inputs shared by every output.
  const MatrixXd& train_inputs() const { return models_.front()->dataset().X; }

  /// Block-diagonal joint posterior; output-major ordering (all q points of
  /// output 0, then output 1, ...).
  GaussianPosterior posterior(const MatrixXd& X, bool observation_noise = false) const;

 private:
  std::vector<std::shared_ptr<const GPModel>> models_;
};

/// Log marginal likelihood with gradient.
LmlResult log_marginal_likelihood(const GPModel& model);

/// Forward derivatives of the posterior at X. Entry `i*d + k` of `dmean` and
/// `droot` holds ∂μ/∂X(i,k) and ∂L/∂X(i,k), where L is the root of the
/// posterior covariance.
struct PosteriorGradient {
  GaussianPosterior posterior;
  MatrixXd root;
  std::vector<VectorXd> dmean;
  std::vector<MatrixXd> droot;
};

PosteriorGradient posterior_with_grad(const GPModel& model, const MatrixXd& X);

// ---------------------------------------------------------------------------
// Hyperparameter fitting

struct FitConfig {
  int restarts = 8;
  std::uint64_t seed = 0;
  int maxiter = 200;
  double grad_tol = 1e-7;
  /// Box used to normalize inputs to [0,1]^d; data min/max when absent.
  std::optional<Bounds> input_bounds;
  /// Optional extra start point (e.g. the previous iteration's fit), tried in
  /// addition to the `restarts` regular starts.
  std::optional<KernelParams> warm_start;
  double lengthscale_min = 1e-3, lengthscale_max = 1e3;  ///< × input range
  double outputscale_min = 1e-3, outputscale_max = 1e3;  ///< standardized units
  double noise_min = 1e-6, noise_max = 1.0;              ///< standardized units
};

/// Raised when every restart fails; carries the best parameters seen, if any.
class FitError : public OptimizationError {
 public:
  FitError(const std::string& what, std::optional<KernelParams> best)
      : OptimizationError(what), best_partial(std::move(best)) {}
  std::optional<KernelParams> best_partial;
};

/// Maximum-likelihood fit of a single-output GP (multi-start bounded
/// quasi-Newton in log-hyperparameter space). Requires n ≥ 2.
GPModel fit_mle(const Dataset& data, const FitConfig& config);

/// Fit each output independently.
ModelList fit_model_list(const Dataset& data, const FitConfig& config,
                         const std::vector<KernelParams>& warm_starts = {});

/// Packs hyperparameters into the LML optimization vector and back.
VectorXd pack_hyperparameters(const KernelParams& p, bool infer_noise);
KernelParams unpack_hyperparameters(const VectorXd& theta, Eigen::Index d, bool infer_noise,
                                    double fixed_noise = 1e-4);

}  // namespace saabo
