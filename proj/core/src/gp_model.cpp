#include "saabo/gp_model.hpp"

#include "saabo/linalg.hpp"

#include <cmath>
#include <numbers>

namespace saabo {

GPModel::GPModel(Dataset data, KernelParams params)
    : data_(std::move(data)), params_(std::move(params)), kernel_(params_) {
  data_.validate();
  if (data_.num_outputs() != 1) throw ShapeError("GPModel: dataset must have exactly one output");
  params_.validate(data_.dim());

  const Eigen::Index n = data_.num_points();
  MatrixXd K = kernel_.matrix(data_.X, data_.X);
  K.diagonal() += train_noise();
  auto factor = std::make_shared<Factor>();
  try {
    auto chol = cholesky_with_jitter(K);
    factor->L = std::move(chol.L);
    factor->jitter = VectorXd::Constant(n, chol.jitter);
  } catch (const NotPsdError& e) {
    throw SingularKernelError(std::string("GPModel: training kernel is singular: ") + e.what());
  }
  factor_ = std::move(factor);
  alpha_ = solve_train(data_.Y.col(0).array() - params_.mean_const);
}

GPModel::GPModel(Dataset data, KernelParams params, std::shared_ptr<const Factor> factor, VectorXd alpha)
    : data_(std::move(data)),
      params_(std::move(params)),
      kernel_(params_),
      factor_(std::move(factor)),
      alpha_(std::move(alpha)) {}

VectorXd GPModel::train_noise() const {
  if (data_.noise_var) return data_.noise_var->col(0);
  return VectorXd::Constant(data_.num_points(), params_.noise_var_hom);
}

double GPModel::new_point_noise() const {
  if (data_.noise_var) {
    return data_.num_points() > 0 ? data_.noise_var->col(0).mean() : 0.0;
  }
  return params_.noise_var_hom;
}

void GPModel::check_points(const MatrixXd& X) const {
  if (X.cols() != dim()) throw ShapeError("GPModel: candidate dimension does not match the model");
  if (!X.allFinite()) throw DomainError("GPModel: non-finite candidate coordinates");
}

MatrixXd GPModel::solve_train(const MatrixXd& rhs) const {
  if (num_train() == 0) return MatrixXd(0, rhs.cols());
  const auto tri = factor_->L.triangularView<Eigen::Lower>();
  return tri.transpose().solve(tri.solve(rhs));
}

MatrixXd GPModel::train_cross(const MatrixXd& X) const {
  return kernel_.matrix(data_.X, X);
}

VectorXd GPModel::posterior_mean(const MatrixXd& X) const {
  check_points(X);
  VectorXd mu = VectorXd::Constant(X.rows(), params_.mean_const);
  if (num_train() > 0) mu.noalias() += train_cross(X).transpose() * alpha_;
  return mu;
}

VectorXd GPModel::posterior_variance(const MatrixXd& X) const {
  check_points(X);
  VectorXd var = VectorXd::Constant(X.rows(), params_.outputscale);
  if (num_train() > 0) {
    const MatrixXd V = factor_->L.triangularView<Eigen::Lower>().solve(train_cross(X));
    var -= V.colwise().squaredNorm().transpose();
  }
  return var.cwiseMax(0.0);
}

CrossCovariance GPModel::posterior_cross_cov(const MatrixXd& A, const MatrixXd& B) const {
  check_points(A);
  check_points(B);
  CrossCovariance cc;
  cc.W_A = solve_train(train_cross(A));
  cc.K_TB = train_cross(B);
  cc.value = kernel_.matrix(A, B);
  if (num_train() > 0) cc.value.noalias() -= cc.W_A.transpose() * cc.K_TB;
  return cc;
}

GaussianPosterior GPModel::posterior(const MatrixXd& X, bool observation_noise) const {
  if (X.rows() < 1) throw ShapeError("posterior: need at least one candidate point");
  GaussianPosterior post;
  post.mean = posterior_mean(X);
  const CrossCovariance cc = posterior_cross_cov(X, X);
  post.cov = 0.5 * (cc.value + cc.value.transpose());
  if (observation_noise) post.cov.diagonal().array() += new_point_noise();
  post.includes_observation_noise = observation_noise;
  return post;
}

void GPModel::mean_vjp(const MatrixXd& X, const VectorXd& g, MatrixXd& gX) const {
  if (num_train() == 0) return;
  const MatrixXd G = g * alpha_.transpose();
  kernel_.accumulate_grad_first(X, data_.X, G, gX);
}

void GPModel::cross_cov_vjp(const MatrixXd& A, const MatrixXd& B, const CrossCovariance& cc,
                            const MatrixXd& gC, MatrixXd* gA, MatrixXd* gB) const {
  const bool has_train = num_train() > 0;
  if (gA) {
    kernel_.accumulate_grad_first(A, B, gC, *gA);
    if (has_train) {
      const MatrixXd G_AT = -solve_train(cc.K_TB * gC.transpose()).transpose();
      kernel_.accumulate_grad_first(A, data_.X, G_AT, *gA);
    }
  }
  if (gB) {
    const MatrixXd gCt = gC.transpose();
    kernel_.accumulate_grad_first(B, A, gCt, *gB);
    if (has_train) {
      const MatrixXd G_BT = -gCt * cc.W_A.transpose();
      kernel_.accumulate_grad_first(B, data_.X, G_BT, *gB);
    }
  }
}

void GPModel::variance_vjp(const MatrixXd& X, const MatrixXd& W, const VectorXd& g, MatrixXd& gX) const {
  if (num_train() == 0) return;
  const MatrixXd G = -2.0 * g.asDiagonal() * W.transpose();
  kernel_.accumulate_grad_first(X, data_.X, G, gX);
}

namespace {

struct Extension {
  MatrixXd L;
  VectorXd jitter;
};

}  // namespace

GPModel GPModel::condition_on_observations(const MatrixXd& X, const MatrixXd& Y) const {
  check_points(X);
  if (Y.rows() != X.rows() || Y.cols() != 1) throw ShapeError("condition_on_observations: Y must be k×1");
  const Eigen::Index n = num_train(), k = X.rows();
  const double noise = new_point_noise();

  const CrossCovariance cc = posterior_cross_cov(X, X);
  MatrixXd S = 0.5 * (cc.value + cc.value.transpose());
  S.diagonal().array() += noise;
  auto chol = cholesky_with_jitter(S);

  auto factor = std::make_shared<Factor>();
  factor->L = MatrixXd::Zero(n + k, n + k);
  factor->L.topLeftCorner(n, n) = factor_->L;
  if (n > 0) {
    factor->L.bottomLeftCorner(k, n) =
        factor_->L.triangularView<Eigen::Lower>().solve(train_cross(X)).transpose();
  }
  factor->L.bottomRightCorner(k, k) = chol.L;
  factor->jitter.resize(n + k);
  factor->jitter << factor_->jitter, VectorXd::Constant(k, chol.jitter);

  std::optional<MatrixXd> nv;
  if (data_.noise_var) nv = MatrixXd::Constant(k, 1, noise);
  Dataset aug = data_.appended(X, Y, nv);

  const MatrixXd& Lf = factor->L;
  const auto tri = Lf.triangularView<Eigen::Lower>();
  VectorXd alpha = tri.transpose().solve(tri.solve(VectorXd(aug.Y.col(0).array() - params_.mean_const)).eval());
  return GPModel(std::move(aug), params_, std::move(factor), std::move(alpha));
}

std::vector<GPModel> GPModel::fantasize(const MatrixXd& X, const MatrixXd& base_samples) const {
  check_points(X);
  const Eigen::Index n = num_train(), q = X.rows();
  if (base_samples.cols() != q) throw ShapeError("fantasize: base samples must be N×q");
  const double noise = new_point_noise();

  const VectorXd mu = posterior_mean(X);
  const CrossCovariance cc = posterior_cross_cov(X, X);
  MatrixXd S = 0.5 * (cc.value + cc.value.transpose());
  S.diagonal().array() += noise;
  auto chol = cholesky_with_jitter(S);

  auto factor = std::make_shared<Factor>();
  factor->L = MatrixXd::Zero(n + q, n + q);
  factor->L.topLeftCorner(n, n) = factor_->L;
  if (n > 0) {
    factor->L.bottomLeftCorner(q, n) =
        factor_->L.triangularView<Eigen::Lower>().solve(train_cross(X)).transpose();
  }
  factor->L.bottomRightCorner(q, q) = chol.L;
  factor->jitter.resize(n + q);
  factor->jitter << factor_->jitter, VectorXd::Constant(q, chol.jitter);
  std::shared_ptr<const Factor> shared = factor;

  std::optional<MatrixXd> nv;
  if (data_.noise_var) nv = MatrixXd::Constant(q, 1, noise);

  std::vector<GPModel> out;
  out.reserve(base_samples.rows());
  const auto tri = shared->L.triangularView<Eigen::Lower>();
  for (Eigen::Index i = 0; i < base_samples.rows(); ++i) {
    const VectorXd y = mu + chol.L * base_samples.row(i).transpose();
    Dataset aug = data_.appended(X, MatrixXd(y), nv);
    VectorXd alpha = tri.transpose().solve(tri.solve(VectorXd(aug.Y.col(0).array() - params_.mean_const)).eval());
    out.push_back(GPModel(std::move(aug), params_, shared, std::move(alpha)));
  }
  return out;
}

// ---------------------------------------------------------------------------

ModelList::ModelList(GPModel model) {
  models_.push_back(std::make_shared<const GPModel>(std::move(model)));
}

ModelList::ModelList(std::vector<GPModel> models) {
  if (models.empty()) throw ShapeError("ModelList: need at least one model");
  for (auto& m : models) {
    if (m.dim() != models.front().dim() || m.num_train() != models.front().num_train() ||
        m.dataset().X != models.front().dataset().X) {
      throw ShapeError("ModelList: all outputs must share the same training inputs");
    }
  }
  for (auto& m : models) models_.push_back(std::make_shared<const GPModel>(std::move(m)));
}

GaussianPosterior ModelList::posterior(const MatrixXd& X, bool observation_noise) const {
  const Eigen::Index q = X.rows();
  const auto m = static_cast<Eigen::Index>(models_.size());
  GaussianPosterior post;
  post.mean.resize(q * m);
  post.cov = MatrixXd::Zero(q * m, q * m);
  post.includes_observation_noise = observation_noise;
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto pj = models_[j]->posterior(X, observation_noise);
    post.mean.segment(j * q, q) = pj.mean;
    post.cov.block(j * q, j * q, q, q) = pj.cov;
  }
  return post;
}

// ---------------------------------------------------------------------------

LmlResult log_marginal_likelihood(const GPModel& model) {
  const Eigen::Index n = model.num_train(), d = model.dim();
  if (n < 1) throw ShapeError("log_marginal_likelihood: need at least one observation");
  const auto& p = model.params();
  const bool infer_noise = !model.dataset().has_fixed_noise();
  const VectorXd& alpha = model.alpha();
  const VectorXd r = model.dataset().Y.col(0).array() - p.mean_const;

  LmlResult out;
  out.value = -0.5 * r.dot(alpha) - model.chol_train().diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  const MatrixXd Kinv = model.solve_train(MatrixXd::Identity(n, n));
  const MatrixXd Q = alpha * alpha.transpose() - Kinv;
  const MatrixXd& X = model.dataset().X;
  const VectorXd inv_ls2 = p.lengthscales.array().square().inverse();
  constexpr double kSqrt5 = 2.2360679774997896964;

  out.grad = VectorXd::Zero(d + 2 + (infer_noise ? 1 : 0));
  double g_logs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = X(i, k) - X(j, k);
        r2 += diff * diff * inv_ls2(k);
      }
      const double rr = std::sqrt(r2);
      const double e = std::exp(-kSqrt5 * rr);
      const double kval = p.outputscale * (1.0 + kSqrt5 * rr + (5.0 / 3.0) * r2) * e;
      const double dfac = (5.0 / 3.0) * p.outputscale * (1.0 + kSqrt5 * rr) * e;
      const double qij = 0.5 * Q(i, j);
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = X(i, k) - X(j, k);
        out.grad(k) += qij * dfac * diff * diff * inv_ls2(k);
      }
      g_logs += qij * kval;
    }
  }
  out.grad(d) = g_logs;
  out.grad(d + 1) = alpha.sum();
  if (infer_noise) out.grad(d + 2) = 0.5 * Q.trace() * p.noise_var_hom;
  return out;
}

PosteriorGradient posterior_with_grad(const GPModel& model, const MatrixXd& X) {
  const Eigen::Index q = X.rows(), d = model.dim(), n = model.num_train();
  PosteriorGradient out;
  out.posterior = model.posterior(X, false);
  out.root = root_decomposition(out.posterior.cov);

  const MatrixXd& T = model.dataset().X;
  const MatrixXd K_TX = model.train_cross(X);
  const MatrixXd W = model.solve_train(K_TX);  // n×q
  const Matern52& kern = model.kernel();

  out.dmean.assign(q * d, VectorXd::Zero(q));
  out.droot.assign(q * d, MatrixXd::Zero(q, q));
  for (Eigen::Index i = 0; i < q; ++i) {
    // ∂k(x_i, t)/∂x_i for every training point, n×d
    MatrixXd dKT(n, d);
    for (Eigen::Index t = 0; t < n; ++t) dKT.row(t) = kern.grad_first(X.row(i).transpose(), T.row(t).transpose());
    MatrixXd dKX(q, d);
    for (Eigen::Index j = 0; j < q; ++j) {
      dKX.row(j) = (j == i) ? VectorXd::Zero(d) : kern.grad_first(X.row(i).transpose(), X.row(j).transpose());
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      VectorXd dmu = VectorXd::Zero(q);
      if (n > 0) dmu(i) = dKT.col(k).dot(model.alpha());
      out.dmean[i * d + k] = dmu;

      MatrixXd dS = MatrixXd::Zero(q, q);
      dS.row(i) += dKX.col(k).transpose();
      dS.col(i) += dKX.col(k);
      if (n > 0) {
        const VectorXd rW = W.transpose() * dKT.col(k);  // q
        dS.row(i) -= rW.transpose();
        dS.col(i) -= rW;
      }
      out.droot[i * d + k] = cholesky_forward(out.root, dS);
    }
  }
  return out;
}

}  // namespace saabo
