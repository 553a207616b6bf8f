#pragma once

#include "saabo/gp_model.hpp"
#include "saabo/objectives.hpp"
#include "saabo/sampling.hpp"

#include <memory>
#include <optional>
#include <string>

namespace saabo {

/// Utility parameters shared by the acquisition functions.
struct AcquisitionParams {
  double best_f = 0.0;          ///< qEI incumbent
  double beta = 0.2;            ///< qUCB exploration weight
  Eigen::Index num_fantasies = 64;
  Eigen::Index num_inner_samples = 32;  ///< N_I for non-affine inner expectations
  MatrixXd mc_points;           ///< qNIPV integration points, r×d
  MatrixXd X_baseline;          ///< qNEI baseline, b×d
  std::optional<double> mu_star;  ///< max posterior mean, required by one-shot KG
};

/// Everything an acquisition function needs besides the candidate set.
/// Base samples stay frozen for the lifetime of one optimization.
struct AcquisitionContext {
  std::shared_ptr<const ModelList> model;
  ObjectiveSpec objective;
  BaseSampleSet base_samples;        ///< N×((q+p)·m); fantasies × ... for KG
  BaseSampleSet inner_base_samples;  ///< N_I×m, inner expectation samples
  MatrixXd X_pending;                ///< p×d, zero rows when absent
  AcquisitionParams params;
  SamplerSpec sampler;               ///< how to redraw base samples on rebuild

  Eigen::Index dim() const { return model->dim(); }
  Eigen::Index num_outputs() const { return static_cast<Eigen::Index>(model->num_outputs()); }
  Eigen::Index num_pending() const { return X_pending.rows(); }
  /// Throws on inconsistent shapes.
  void validate() const;
};

struct AcquisitionValue {
  double value = 0.0;
  MatrixXd grad;  ///< same shape as the candidate set
};

// ---------------------------------------------------------------------------
// Free functions. The candidate set X is q×d; base samples must already have
// the matching shape, otherwise ShapeError is raised.

/// Closed-form EI for a single-output model at one point.
AcquisitionValue analytic_ei(const ModelList& model, const MatrixXd& x, double best_f);

/// Monte-Carlo qEI: mean over samples of (max_j g(ξ)_j − best_f)⁺ with the
/// pending points joining the max.
AcquisitionValue q_expected_improvement(const AcquisitionContext& ctx, const MatrixXd& X);

/// qNEI against the context's baseline; pending points count as new points.
/// Base samples cover [baseline; X; pending] per output.
AcquisitionValue q_noisy_expected_improvement(const AcquisitionContext& ctx, const MatrixXd& X);

/// Baseline factorization and baseline sample maxima, reused across qNEI
/// evaluations that share a context.
struct QneiBaseline;
std::shared_ptr<const QneiBaseline> prepare_qnei_baseline(const AcquisitionContext& ctx, Eigen::Index q);

/// Generalized qUCB: mean over samples of max_j [m_j + β′|g(ξ)_j − m_j|], β′ = √(βπ/2).
AcquisitionValue q_upper_confidence_bound(const AcquisitionContext& ctx, const MatrixXd& X);

/// Posterior mean of g for affine objectives at q = 1, otherwise the MC
/// expected max of g over the q points using the inner base samples.
AcquisitionValue posterior_mean_and_simple_regret(const AcquisitionContext& ctx, const MatrixXd& X);

/// One-shot KG over X_aug = [X; x′_1..x′_N] ((q+N)×d).
AcquisitionValue q_knowledge_gradient_one_shot(const AcquisitionContext& ctx, const MatrixXd& X_aug);

/// −(1/r) Σ over mc_points of the posterior variance after observing X.
AcquisitionValue q_neg_integrated_posterior_variance(const AcquisitionContext& ctx, const MatrixXd& X);

// ---------------------------------------------------------------------------

enum class AcquisitionKind { analytic_ei, qei, qnei, qucb, simple_regret, okg, nipv };

std::string to_string(AcquisitionKind kind);
/// Accepts the names produced by to_string; throws ConfigError otherwise.
AcquisitionKind parse_acquisition_kind(const std::string& name);

/// Acquisition bound to a context and a batch size. Evaluation is pure and
/// may be called concurrently.
class AcquisitionFunction {
 public:
  AcquisitionFunction(AcquisitionKind kind, AcquisitionContext ctx, Eigen::Index q);

  AcquisitionKind kind() const { return kind_; }
  const AcquisitionContext& context() const { return ctx_; }
  Eigen::Index dim() const { return ctx_.dim(); }
  /// Batch size of the candidate.
  Eigen::Index q() const { return q_; }
  /// Rows of the optimization variable: q, or q + num_fantasies for one-shot KG.
  Eigen::Index num_rows() const;

  /// Value and gradient; X has num_rows() rows.
  AcquisitionValue evaluate(const MatrixXd& X) const;
  /// Value only (skips the reverse pass).
  double value(const MatrixXd& X) const;

  /// Same acquisition for batch size q with the given pending points and
  /// base samples freshly drawn from the context's sampler spec.
  AcquisitionFunction rebuild(Eigen::Index q, const MatrixXd& pending) const;

 private:
  AcquisitionValue run(const MatrixXd& X, bool need_grad) const;

  AcquisitionKind kind_;
  AcquisitionContext ctx_;
  Eigen::Index q_;
  std::shared_ptr<const QneiBaseline> baseline_;
};

}  // namespace saabo
