#include "saabo/gp_model.hpp"
#include "saabo/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace saabo {

VectorXd pack_hyperparameters(const KernelParams& p, bool infer_noise) {
  const Eigen::Index d = p.lengthscales.size();
  VectorXd theta(d + 2 + (infer_noise ? 1 : 0));
  theta.head(d) = p.lengthscales.array().log();
  theta(d) = std::log(p.outputscale);
  theta(d + 1) = p.mean_const;
  if (infer_noise) theta(d + 2) = std::log(p.noise_var_hom);
  return theta;
}

KernelParams unpack_hyperparameters(const VectorXd& theta, Eigen::Index d, bool infer_noise,
                                    double fixed_noise) {
  KernelParams p;
  p.lengthscales = theta.head(d).array().exp();
  p.outputscale = std::exp(theta(d));
  p.mean_const = theta(d + 1);
  p.noise_var_hom = infer_noise ? std::exp(theta(d + 2)) : fixed_noise;
  return p;
}

namespace {

// Row order used for fitting: lexicographic in (X, Y, noise), so the fit does
// not depend on how the caller ordered the observations.
Dataset canonical_order(const Dataset& data) {
  const Eigen::Index n = data.num_points();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto key = [&](Eigen::Index i) {
    std::vector<double> k;
    k.reserve(data.dim() + 2);
    for (Eigen::Index c = 0; c < data.dim(); ++c) k.push_back(data.X(i, c));
    k.push_back(data.Y(i, 0));
    if (data.noise_var) k.push_back((*data.noise_var)(i, 0));
    return k;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return key(a) < key(b); });
  Dataset out;
  out.X.resize(n, data.dim());
  out.Y.resize(n, 1);
  if (data.noise_var) out.noise_var = MatrixXd(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    out.X.row(r) = data.X.row(idx[r]);
    out.Y(r, 0) = data.Y(idx[r], 0);
    if (data.noise_var) (*out.noise_var)(r, 0) = (*data.noise_var)(idx[r], 0);
  }
  return out;
}

}  // namespace

GPModel fit_mle(const Dataset& data, const FitConfig& config) {
  data.validate();
  if (data.num_outputs() != 1) throw ShapeError("fit_mle: dataset must have exactly one output");
  const Eigen::Index n = data.num_points(), d = data.dim();
  if (n < 2) throw ConfigError("fit_mle: need at least two observations");
  if (config.restarts < 1) throw ConfigError("fit_mle: restarts must be ≥ 1");

  // Normalize inputs to the unit cube and standardize outputs.
  VectorXd lo, range;
  if (config.input_bounds) {
    if (config.input_bounds->dim() != d) throw ShapeError("fit_mle: input bounds dimension mismatch");
    lo = config.input_bounds->lower;
    range = config.input_bounds->range();
  } else {
    lo = data.X.colwise().minCoeff().transpose();
    range = data.X.colwise().maxCoeff().transpose() - lo;
    for (Eigen::Index k = 0; k < d; ++k) {
      if (!(range(k) > 0.0)) range(k) = 1.0;
    }
  }
  const Dataset sorted = canonical_order(data);
  const double ymean = sorted.Y.col(0).mean();
  double ysd = std::sqrt((sorted.Y.col(0).array() - ymean).square().sum() / static_cast<double>(n));
  if (!(ysd > 1e-12)) ysd = 1.0;

  Dataset norm;
  norm.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    norm.X.row(i) = (sorted.X.row(i) - lo.transpose()).cwiseQuotient(range.transpose());
  }
  norm.Y = (sorted.Y.array() - ymean) / ysd;
  if (sorted.noise_var) norm.noise_var = *sorted.noise_var / (ysd * ysd);
  const bool infer_noise = !data.has_fixed_noise();

  const Eigen::Index k = d + 2 + (infer_noise ? 1 : 0);
  VectorXd tlo(k), thi(k);
  tlo.head(d).setConstant(std::log(config.lengthscale_min));
  thi.head(d).setConstant(std::log(config.lengthscale_max));
  tlo(d) = std::log(config.outputscale_min);
  thi(d) = std::log(config.outputscale_max);
  tlo(d + 1) = -10.0;
  thi(d + 1) = 10.0;
  if (infer_noise) {
    tlo(d + 2) = std::log(config.noise_min);
    thi(d + 2) = std::log(config.noise_max);
  }
  const Bounds theta_bounds(tlo, thi);

  auto neg_lml = [&](const VectorXd& theta, VectorXd& grad) {
    try {
      const GPModel m(norm, unpack_hyperparameters(theta, d, infer_noise));
      const LmlResult r = log_marginal_likelihood(m);
      grad = -r.grad;
      return -r.value;
    } catch (const NotPsdError&) {
      grad.setZero(k);
      return std::numeric_limits<double>::infinity();
    }
  };

  // The warm start (when given) comes on top of the `restarts` regular starts,
  // so a previous optimum cannot crowd out the default start.
  std::vector<VectorXd> starts;
  if (config.warm_start) {
    KernelParams w = *config.warm_start;
    if (w.lengthscales.size() != d) throw ShapeError("fit_mle: warm start has wrong dimension");
    w.lengthscales = w.lengthscales.cwiseQuotient(range);
    w.outputscale /= ysd * ysd;
    w.mean_const = (w.mean_const - ymean) / ysd;
    w.noise_var_hom /= ysd * ysd;
    starts.push_back(pack_hyperparameters(w, infer_noise));
  }
  const int total = config.restarts + static_cast<int>(starts.size());
  KernelParams def;
  def.lengthscales = VectorXd::Constant(d, 0.5);
  def.outputscale = 1.0;
  def.mean_const = 0.0;
  def.noise_var_hom = 1e-2;
  starts.push_back(pack_hyperparameters(def, infer_noise));
  std::uint64_t counter = 0;
  const std::uint64_t stream = derive_seed(config.seed, 0x6669745fULL);
  while (static_cast<int>(starts.size()) < total) {
    VectorXd t(k);
    auto u = [&] { return hash_uniform(stream, counter++); };
    for (Eigen::Index j = 0; j < d; ++j) t(j) = std::log(0.05) + u() * (std::log(2.0) - std::log(0.05));
    t(d) = std::log(0.2) + u() * (std::log(5.0) - std::log(0.2));
    t(d + 1) = -0.5 + u();
    if (infer_noise) t(d + 2) = std::log(1e-4) + u() * (std::log(0.5) - std::log(1e-4));
    starts.push_back(t);
  }

  QuasiNewtonConfig qn;
  qn.maxiter = config.maxiter;
  qn.grad_tol = config.grad_tol;
  qn.ftol = 1e-13;

  double best = std::numeric_limits<double>::infinity();
  std::optional<VectorXd> best_theta;
  for (const auto& s : starts) {
    const QuasiNewtonResult r = bounded_quasi_newton(neg_lml, s, theta_bounds, Sense::minimize, qn);
    if (std::isfinite(r.value) && r.value < best) {
      best = r.value;
      best_theta = r.x;
    }
  }
  if (!best_theta) throw FitError("fit_mle: every restart failed", std::nullopt);

  KernelParams p = unpack_hyperparameters(*best_theta, d, infer_noise);
  p.lengthscales = p.lengthscales.cwiseProduct(range);
  p.outputscale *= ysd * ysd;
  p.mean_const = ymean + ysd * p.mean_const;
  p.noise_var_hom = infer_noise ? p.noise_var_hom * ysd * ysd : 1e-4;
  try {
    return GPModel(data, p);
  } catch (const NotPsdError& e) {
    throw FitError(std::string("fit_mle: fitted kernel is singular in original units: ") + e.what(), p);
  }
}

ModelList fit_model_list(const Dataset& data, const FitConfig& config,
                         const std::vector<KernelParams>& warm_starts) {
  data.validate();
  std::vector<GPModel> models;
  for (Eigen::Index j = 0; j < data.num_outputs(); ++j) {
    FitConfig cfg = config;
    cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(j));
    if (static_cast<std::size_t>(j) < warm_starts.size()) cfg.warm_start = warm_starts[j];
    models.push_back(fit_mle(data.output(j), cfg));
  }
  return ModelList(std::move(models));
}

}  // namespace saabo
