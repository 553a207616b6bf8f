#include "saabo/acquisition.hpp"

#include "saabo/errors.hpp"
#include "saabo/linalg.hpp"
#include "saabo/normal.hpp"
#include "saabo/posterior_sampler.hpp"

#include <cmath>
#include <numbers>

namespace saabo {

void AcquisitionContext::validate() const {
  if (!model || model->num_outputs() == 0) throw ConfigError("acquisition context: model is missing");
  objective.validate(num_outputs());
  if (X_pending.size() > 0 && X_pending.cols() != dim()) {
    throw ShapeError("acquisition context: pending points have the wrong dimension");
  }
  if (params.X_baseline.size() > 0 && params.X_baseline.cols() != dim()) {
    throw ShapeError("acquisition context: baseline points have the wrong dimension");
  }
  if (params.mc_points.size() > 0 && params.mc_points.cols() != dim()) {
    throw ShapeError("acquisition context: mc_points have the wrong dimension");
  }
}

namespace {

MatrixXd with_pending(const AcquisitionContext& ctx, const MatrixXd& X) {
  if (X.cols() != ctx.dim()) throw ShapeError("candidate set has the wrong dimension");
  if (X.rows() < 1) throw ShapeError("candidate set must have at least one row");
  if (ctx.num_pending() == 0) return X;
  MatrixXd Z(X.rows() + ctx.num_pending(), X.cols());
  Z << X, ctx.X_pending;
  return Z;
}

// Row-wise max with the lowest index winning ties.
Eigen::Index argmax_row(const MatrixXd& M, Eigen::Index i) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < M.cols(); ++k) {
    if (M(i, k) > M(i, best)) best = k;
  }
  return best;
}

AcquisitionValue finish(double value, const MatrixXd& gZ, Eigen::Index q, bool need_grad) {
  AcquisitionValue out;
  out.value = value;
  if (need_grad) out.grad = gZ.topRows(q);
  return out;
}

// ---------------------------------------------------------------------------

AcquisitionValue qei(const AcquisitionContext& ctx, const MatrixXd& X, bool need_grad) {
  const MatrixXd Z = with_pending(ctx, X);
  const MatrixXd& E = ctx.base_samples.E();
  const JointSampler js(*ctx.model, Z, E);
  const MatrixXd obj = apply_objective(ctx.objective, js.samples(), Z.rows());
  const Eigen::Index N = obj.rows();
  MatrixXd G = MatrixXd::Zero(N, Z.rows());
  double total = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::Index k = argmax_row(obj, i);
    const double imp = obj(i, k) - ctx.params.best_f;
    if (imp > 0.0) {
      total += imp;
      G(i, k) = 1.0 / static_cast<double>(N);
    }
  }
  MatrixXd gZ = MatrixXd::Zero(Z.rows(), Z.cols());
  if (need_grad) js.backward(objective_vjp(ctx.objective, js.samples(), Z.rows(), G), gZ);
  return finish(total / static_cast<double>(N), gZ, X.rows(), need_grad);
}

AcquisitionValue qucb(const AcquisitionContext& ctx, const MatrixXd& X, bool need_grad) {
  if (!(ctx.params.beta > 0.0)) throw ConfigError("qUCB: beta must be positive");
  const MatrixXd Z = with_pending(ctx, X);
  const JointSampler js(*ctx.model, Z, ctx.base_samples.E());
  const MatrixXd obj = apply_objective(ctx.objective, js.samples(), Z.rows());
  const Eigen::Index N = obj.rows(), q = obj.cols();
  const double Nd = static_cast<double>(N);
  const double beta_prime = std::sqrt(ctx.params.beta * std::numbers::pi / 2.0);
  const VectorXd c = obj.colwise().mean().transpose();

  MatrixXd z(N, q), sgn(N, q);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index k = 0; k < q; ++k) {
      const double dev = obj(i, k) - c(k);
      sgn(i, k) = dev > 0.0 ? 1.0 : (dev < 0.0 ? -1.0 : 0.0);
      z(i, k) = c(k) + beta_prime * std::abs(dev);
    }
  }
  double total = 0.0;
  VectorXd count = VectorXd::Zero(q), sgn_sum = VectorXd::Zero(q);
  std::vector<Eigen::Index> winner(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::Index k = argmax_row(z, i);
    winner[static_cast<std::size_t>(i)] = k;
    total += z(i, k);
    count(k) += 1.0;
    sgn_sum(k) += sgn(i, k);
  }
  MatrixXd gZ = MatrixXd::Zero(Z.rows(), Z.cols());
  if (need_grad) {
    MatrixXd G(N, q);
    for (Eigen::Index k = 0; k < q; ++k) G.col(k).setConstant((count(k) - beta_prime * sgn_sum(k)) / (Nd * Nd));
    for (Eigen::Index l = 0; l < N; ++l) {
      const Eigen::Index k = winner[static_cast<std::size_t>(l)];
      G(l, k) += beta_prime * sgn(l, k) / Nd;
    }
    js.backward(objective_vjp(ctx.objective, js.samples(), q, G), gZ);
  }
  return finish(total / Nd, gZ, X.rows(), need_grad);
}

AcquisitionValue simple_regret(const AcquisitionContext& ctx, const MatrixXd& X, bool need_grad) {
  const MatrixXd Z = with_pending(ctx, X);
  const ModelList& ml = *ctx.model;
  MatrixXd gZ = MatrixXd::Zero(Z.rows(), Z.cols());
  if (ctx.objective.is_affine() && Z.rows() == 1) {
    const VectorXd w = ctx.objective.affine_weights(ctx.num_outputs());
    double v = 0.0;
    for (std::size_t j = 0; j < ml.num_outputs(); ++j) {
      const double wj = w(static_cast<Eigen::Index>(j));
      v += wj * ml[j].posterior_mean(Z)(0);
      if (need_grad) ml[j].mean_vjp(Z, VectorXd::Constant(1, wj), gZ);
    }
    return finish(v, gZ, X.rows(), need_grad);
  }
  if (ctx.inner_base_samples.empty()) throw ConfigError("simple regret: inner base samples are required");
  const JointSampler js(ml, Z, ctx.inner_base_samples.E());
  const MatrixXd obj = apply_objective(ctx.objective, js.samples(), Z.rows());
  const Eigen::Index N = obj.rows();
  MatrixXd G = MatrixXd::Zero(N, Z.rows());
  double total = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::Index k = argmax_row(obj, i);
    total += obj(i, k);
    G(i, k) = 1.0 / static_cast<double>(N);
  }
  if (need_grad) js.backward(objective_vjp(ctx.objective, js.samples(), Z.rows(), G), gZ);
  return finish(total / static_cast<double>(N), gZ, X.rows(), need_grad);
}

// Noisy posterior covariance root at Z for fantasy conditioning.
struct NoisyRoot {
  CrossCovariance cc;
  MatrixXd L;
};

NoisyRoot noisy_root(const GPModel& model, const MatrixXd& Z) {
  NoisyRoot r;
  r.cc = model.posterior_cross_cov(Z, Z);
  MatrixXd S = 0.5 * (r.cc.value + r.cc.value.transpose());
  S.diagonal().array() += model.new_point_noise();
  r.L = cholesky_with_jitter(S).L;
  return r;
}

// Given U = L⁻¹C and ∂/∂U, accumulate the gradient with respect to the
// noisy covariance at Z and return ∂/∂C.
MatrixXd backprop_whitened(const GPModel& model, const MatrixXd& Z, const NoisyRoot& nr, const MatrixXd& U,
                           const MatrixXd& gU, MatrixXd& gZ) {
  const MatrixXd gC = nr.L.triangularView<Eigen::Lower>().transpose().solve(gU);
  const MatrixXd gL = -lower_part(gC * U.transpose());
  const MatrixXd gS = cholesky_backward(nr.L, gL);
  model.cross_cov_vjp(Z, Z, nr.cc, gS, &gZ, &gZ);
  return gC;
}

AcquisitionValue nipv(const AcquisitionContext& ctx, const MatrixXd& X, bool need_grad) {
  const MatrixXd& MC = ctx.params.mc_points;
  if (MC.rows() == 0) throw ConfigError("qNIPV: mc_points must be non-empty");
  const MatrixXd Z = with_pending(ctx, X);
  const double r = static_cast<double>(MC.rows());
  MatrixXd gZ = MatrixXd::Zero(Z.rows(), Z.cols());
  double value = 0.0;
  for (std::size_t j = 0; j < ctx.model->num_outputs(); ++j) {
    const GPModel& model = (*ctx.model)[j];
    const NoisyRoot nr = noisy_root(model, Z);
    const CrossCovariance cc = model.posterior_cross_cov(Z, MC);
    const MatrixXd U = nr.L.triangularView<Eigen::Lower>().solve(cc.value);
    value += -(model.posterior_variance(MC).sum() - U.squaredNorm()) / r;
    if (need_grad) {
      const MatrixXd gC = backprop_whitened(model, Z, nr, U, (2.0 / r) * U, gZ);
      model.cross_cov_vjp(Z, MC, cc, gC, &gZ, nullptr);
    }
  }
  return finish(value, gZ, X.rows(), need_grad);
}

AcquisitionValue okg(const AcquisitionContext& ctx, const MatrixXd& X_aug, bool need_grad) {
  if (!ctx.params.mu_star) throw ConfigError("one-shot KG: mu_star must be computed before evaluation");
  const MatrixXd& E = ctx.base_samples.E();
  const Eigen::Index Nf = E.rows();
  if (X_aug.rows() <= Nf) {
    throw ShapeError("one-shot KG: X_aug must have q + " + std::to_string(Nf) + " rows");
  }
  const Eigen::Index q = X_aug.rows() - Nf;
  const MatrixXd Z = with_pending(ctx, X_aug.topRows(q));
  const MatrixXd Xp = X_aug.bottomRows(Nf);
  const Eigen::Index qz = Z.rows(), m = ctx.num_outputs();
  if (E.cols() != qz * m) {
    throw ShapeError("one-shot KG: base samples must have (q + pending)·m columns");
  }
  const ModelList& ml = *ctx.model;
  const bool affine = ctx.objective.is_affine();
  const double Nd = static_cast<double>(Nf);

  struct Out {
    NoisyRoot nr;
    CrossCovariance cc;
    MatrixXd U, Wp;
  };
  std::vector<Out> outs(static_cast<std::size_t>(m));
  MatrixXd fmean(Nf, m), fvar(Nf, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const GPModel& model = ml[static_cast<std::size_t>(j)];
    Out& o = outs[static_cast<std::size_t>(j)];
    o.nr = noisy_root(model, Z);
    o.cc = model.posterior_cross_cov(Z, Xp);
    o.U = o.nr.L.triangularView<Eigen::Lower>().solve(o.cc.value);
    const auto Ej = E.middleCols(j * qz, qz);
    fmean.col(j) = model.posterior_mean(Xp);
    for (Eigen::Index i = 0; i < Nf; ++i) fmean(i, j) += Ej.row(i).dot(o.U.col(i));
    if (!affine) {
      o.Wp = model.solve_train(o.cc.K_TB);
      VectorXd v = VectorXd::Constant(Nf, model.params().outputscale);
      if (model.num_train() > 0) v -= o.cc.K_TB.cwiseProduct(o.Wp).colwise().sum().transpose();
      fvar.col(j) = v - o.U.colwise().squaredNorm().transpose();
    }
  }

  MatrixXd g_mean = MatrixXd::Zero(Nf, m), g_var = MatrixXd::Zero(Nf, m);
  double total = 0.0;
  if (affine) {
    const VectorXd w = ctx.objective.affine_weights(m);
    total = (fmean * w).sum();
    g_mean.rowwise() = w.transpose() / Nd;
  } else {
    const MatrixXd& EI = ctx.inner_base_samples.E();
    if (EI.rows() == 0 || EI.cols() != m) throw ShapeError("one-shot KG: inner base samples must be N_I×m");
    const double NI = static_cast<double>(EI.rows());
    VectorXd y(m), gy(m);
    for (Eigen::Index i = 0; i < Nf; ++i) {
      VectorXd sd(m);
      for (Eigen::Index j = 0; j < m; ++j) sd(j) = fvar(i, j) > 0.0 ? std::sqrt(fvar(i, j)) : 0.0;
      for (Eigen::Index l = 0; l < EI.rows(); ++l) {
        for (Eigen::Index j = 0; j < m; ++j) y(j) = fmean(i, j) + sd(j) * EI(l, j);
        total += ctx.objective.evaluate_point(y, need_grad ? &gy : nullptr) / NI;
        if (need_grad) {
          for (Eigen::Index j = 0; j < m; ++j) {
            g_mean(i, j) += gy(j) / (NI * Nd);
            if (sd(j) > 0.0) g_var(i, j) += gy(j) * EI(l, j) / (2.0 * sd(j) * NI * Nd);
          }
        }
      }
    }
  }

  AcquisitionValue out;
  out.value = total / Nd - *ctx.params.mu_star;
  if (!need_grad) return out;

  MatrixXd gZ = MatrixXd::Zero(qz, Z.cols()), gXp = MatrixXd::Zero(Nf, Z.cols());
  for (Eigen::Index j = 0; j < m; ++j) {
    const GPModel& model = ml[static_cast<std::size_t>(j)];
    const Out& o = outs[static_cast<std::size_t>(j)];
    const auto Ej = E.middleCols(j * qz, qz);
    model.mean_vjp(Xp, g_mean.col(j), gXp);
    MatrixXd gU(qz, Nf);
    for (Eigen::Index i = 0; i < Nf; ++i) {
      gU.col(i) = g_mean(i, j) * Ej.row(i).transpose() - 2.0 * g_var(i, j) * o.U.col(i);
    }
    const MatrixXd gC = backprop_whitened(model, Z, o.nr, o.U, gU, gZ);
    model.cross_cov_vjp(Z, Xp, o.cc, gC, &gZ, &gXp);
    if (!affine) model.variance_vjp(Xp, o.Wp, g_var.col(j), gXp);
  }
  out.grad.resize(X_aug.rows(), X_aug.cols());
  out.grad << gZ.topRows(q), gXp;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// qNEI

struct QneiBaseline {
  struct Out {
    MatrixXd L;  // root of the baseline posterior covariance
    MatrixXd H;  // E_B L⁻¹, row i is η^iᵀ
  };
  MatrixXd B;
  Eigen::Index q_total = 0;  // q + pending
  std::vector<Out> outs;
  VectorXd best_prev;
};

std::shared_ptr<const QneiBaseline> prepare_qnei_baseline(const AcquisitionContext& ctx, Eigen::Index q) {
  const MatrixXd& B = ctx.params.X_baseline;
  if (B.rows() == 0) throw ConfigError("qNEI: X_baseline must be non-empty");
  const Eigen::Index b = B.rows(), qz = q + ctx.num_pending(), m = ctx.num_outputs();
  const MatrixXd& E = ctx.base_samples.E();
  if (E.cols() != (b + qz) * m) {
    throw ShapeError("qNEI: base samples must have (baseline + q + pending)·m columns");
  }
  auto cache = std::make_shared<QneiBaseline>();
  cache->B = B;
  cache->q_total = qz;
  MatrixXd xi_B(E.rows(), b * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const GPModel& model = (*ctx.model)[static_cast<std::size_t>(j)];
    const auto post = model.posterior(B, false);
    QneiBaseline::Out o;
    o.L = root_decomposition(post.cov);
    const MatrixXd EB = E.middleCols(j * (b + qz), b);
    if (o.L.diagonal().minCoeff() > 0.0) {
      o.H = o.L.triangularView<Eigen::Lower>().transpose().solve(EB.transpose()).transpose();
    } else {
      o.H = MatrixXd::Zero(E.rows(), b);
    }
    auto blk = xi_B.middleCols(j * b, b);
    blk.noalias() = EB * o.L.transpose();
    blk.rowwise() += post.mean.transpose();
    cache->outs.push_back(std::move(o));
  }
  cache->best_prev = apply_objective(ctx.objective, xi_B, b).rowwise().maxCoeff();
  return cache;
}

namespace {

AcquisitionValue qnei(const AcquisitionContext& ctx, const MatrixXd& X, bool need_grad, const QneiBaseline& base) {
  const MatrixXd Z = with_pending(ctx, X);
  const Eigen::Index qz = Z.rows(), b = base.B.rows(), m = ctx.num_outputs();
  if (qz != base.q_total) throw ShapeError("qNEI: candidate set size differs from the frozen base samples");
  const MatrixXd& E = ctx.base_samples.E();
  const Eigen::Index N = E.rows();

  struct Out {
    CrossCovariance cc_BZ, cc_ZZ;
    MatrixXd M, Lc;
  };
  std::vector<Out> outs(static_cast<std::size_t>(m));
  MatrixXd xi(N, qz * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const GPModel& model = (*ctx.model)[static_cast<std::size_t>(j)];
    const auto& bo = base.outs[static_cast<std::size_t>(j)];
    Out& o = outs[static_cast<std::size_t>(j)];
    o.cc_BZ = model.posterior_cross_cov(base.B, Z);
    o.cc_ZZ = model.posterior_cross_cov(Z, Z);
    const auto tri = bo.L.triangularView<Eigen::Lower>();
    if (bo.L.diagonal().minCoeff() > 0.0) {
      o.M = tri.transpose().solve(tri.solve(o.cc_BZ.value));
    } else {
      o.M = MatrixXd::Zero(b, qz);
    }
    MatrixXd S = 0.5 * (o.cc_ZZ.value + o.cc_ZZ.value.transpose()) - o.cc_BZ.value.transpose() * o.M;
    S = 0.5 * (S + S.transpose());
    o.Lc = root_decomposition(S);
    auto blk = xi.middleCols(j * qz, qz);
    blk.noalias() = bo.H * o.cc_BZ.value + E.middleCols(j * (b + qz) + b, qz) * o.Lc.transpose();
    blk.rowwise() += model.posterior_mean(Z).transpose();
  }

  const MatrixXd obj = apply_objective(ctx.objective, xi, qz);
  MatrixXd G = MatrixXd::Zero(N, qz);
  double total = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::Index k = argmax_row(obj, i);
    const double imp = obj(i, k) - base.best_prev(i);
    if (imp > 0.0) {
      total += imp;
      G(i, k) = 1.0 / static_cast<double>(N);
    }
  }
  MatrixXd gZ = MatrixXd::Zero(qz, Z.cols());
  if (need_grad) {
    const MatrixXd Gxi = objective_vjp(ctx.objective, xi, qz, G);
    for (Eigen::Index j = 0; j < m; ++j) {
      const GPModel& model = (*ctx.model)[static_cast<std::size_t>(j)];
      const auto& bo = base.outs[static_cast<std::size_t>(j)];
      const Out& o = outs[static_cast<std::size_t>(j)];
      const auto Gj = Gxi.middleCols(j * qz, qz);
      model.mean_vjp(Z, Gj.colwise().sum().transpose(), gZ);
      const MatrixXd gLc = lower_part(Gj.transpose() * E.middleCols(j * (b + qz) + b, qz));
      const MatrixXd gS = cholesky_backward(o.Lc, gLc);
      const MatrixXd gBZ = bo.H.transpose() * Gj - 2.0 * o.M * gS;
      model.cross_cov_vjp(Z, Z, o.cc_ZZ, gS, &gZ, &gZ);
      model.cross_cov_vjp(base.B, Z, o.cc_BZ, gBZ, nullptr, &gZ);
    }
  }
  return finish(total / static_cast<double>(N), gZ, X.rows(), need_grad);
}

}  // namespace

// ---------------------------------------------------------------------------

AcquisitionValue analytic_ei(const ModelList& model, const MatrixXd& x, double best_f) {
  if (model.num_outputs() != 1) throw ShapeError("analytic EI requires a single-output model");
  if (x.rows() != 1) throw ShapeError("analytic EI is defined for q = 1");
  const GPModel& gp = model[0];
  const double mu = gp.posterior_mean(x)(0);
  const MatrixXd W = gp.solve_train(gp.train_cross(x));
  const double var = gp.posterior_variance(x)(0);
  const double sigma = std::sqrt(std::max(var, 0.0));
  AcquisitionValue out;
  out.grad = MatrixXd::Zero(1, x.cols());
  if (sigma < 1e-12) {
    out.value = std::max(mu - best_f, 0.0);
    return out;
  }
  const double z = (mu - best_f) / sigma;
  const double cdf = normal_cdf(z), pdf = normal_pdf(z);
  out.value = sigma * (z * cdf + pdf);
  gp.mean_vjp(x, VectorXd::Constant(1, cdf), out.grad);
  gp.variance_vjp(x, W, VectorXd::Constant(1, pdf / (2.0 * sigma)), out.grad);
  return out;
}

AcquisitionValue q_expected_improvement(const AcquisitionContext& ctx, const MatrixXd& X) {
  return qei(ctx, X, true);
}

AcquisitionValue q_noisy_expected_improvement(const AcquisitionContext& ctx, const MatrixXd& X) {
  return qnei(ctx, X, true, *prepare_qnei_baseline(ctx, X.rows()));
}

AcquisitionValue q_upper_confidence_bound(const AcquisitionContext& ctx, const MatrixXd& X) {
  return qucb(ctx, X, true);
}

AcquisitionValue posterior_mean_and_simple_regret(const AcquisitionContext& ctx, const MatrixXd& X) {
  return simple_regret(ctx, X, true);
}

AcquisitionValue q_knowledge_gradient_one_shot(const AcquisitionContext& ctx, const MatrixXd& X_aug) {
  return okg(ctx, X_aug, true);
}

AcquisitionValue q_neg_integrated_posterior_variance(const AcquisitionContext& ctx, const MatrixXd& X) {
  return nipv(ctx, X, true);
}

// ---------------------------------------------------------------------------

std::string to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::analytic_ei: return "analytic_ei";
    case AcquisitionKind::qei: return "qei";
    case AcquisitionKind::qnei: return "qnei";
    case AcquisitionKind::qucb: return "qucb";
    case AcquisitionKind::simple_regret: return "simple_regret";
    case AcquisitionKind::okg: return "okg";
    case AcquisitionKind::nipv: return "nipv";
  }
  return "unknown";
}

AcquisitionKind parse_acquisition_kind(const std::string& name) {
  for (auto k : {AcquisitionKind::analytic_ei, AcquisitionKind::qei, AcquisitionKind::qnei, AcquisitionKind::qucb,
                 AcquisitionKind::simple_regret, AcquisitionKind::okg, AcquisitionKind::nipv}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown acquisition function '" + name + "'");
}

AcquisitionFunction::AcquisitionFunction(AcquisitionKind kind, AcquisitionContext ctx, Eigen::Index q)
    : kind_(kind), ctx_(std::move(ctx)), q_(q) {
  ctx_.validate();
  if (q < 1) throw ConfigError("acquisition: q must be ≥ 1");
  if (ctx_.X_pending.size() == 0) ctx_.X_pending.resize(0, ctx_.dim());
  const Eigen::Index m = ctx_.num_outputs(), qz = q + ctx_.num_pending();

  auto ensure = [&](BaseSampleSet& set, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    if (set.empty()) {
      set = draw_base_samples(ctx_.sampler.mode, seed, rows, cols, 1);
    } else if (set.dim() != cols) {
      throw ShapeError("acquisition: frozen base samples have " + std::to_string(set.dim()) + " columns, expected " +
                       std::to_string(cols));
    }
  };
  const std::uint64_t inner_seed = derive_seed(ctx_.sampler.seed, 0x696e6e6572ULL);
  switch (kind_) {
    case AcquisitionKind::analytic_ei:
      if (q != 1 || ctx_.num_pending() != 0) throw ConfigError("analytic EI supports q = 1 without pending points");
      if (m != 1) throw ShapeError("analytic EI requires a single-output model");
      break;
    case AcquisitionKind::qei:
    case AcquisitionKind::qucb:
      ensure(ctx_.base_samples, ctx_.sampler.num_samples, qz * m, ctx_.sampler.seed);
      break;
    case AcquisitionKind::qnei: {
      if (ctx_.params.X_baseline.rows() == 0) ctx_.params.X_baseline = ctx_.model->train_inputs();
      ensure(ctx_.base_samples, ctx_.sampler.num_samples, (ctx_.params.X_baseline.rows() + qz) * m,
             ctx_.sampler.seed);
      baseline_ = prepare_qnei_baseline(ctx_, q);
      break;
    }
    case AcquisitionKind::simple_regret:
      if (!(ctx_.objective.is_affine() && qz == 1)) {
        ensure(ctx_.inner_base_samples, ctx_.params.num_inner_samples, qz * m, inner_seed);
      }
      break;
    case AcquisitionKind::okg:
      if (!ctx_.params.mu_star) throw ConfigError("one-shot KG: mu_star must be set in the context");
      ensure(ctx_.base_samples, ctx_.params.num_fantasies, qz * m, ctx_.sampler.seed);
      if (!ctx_.objective.is_affine()) ensure(ctx_.inner_base_samples, ctx_.params.num_inner_samples, m, inner_seed);
      break;
    case AcquisitionKind::nipv:
      if (ctx_.params.mc_points.rows() == 0) throw ConfigError("qNIPV: mc_points must be non-empty");
      break;
  }
}

Eigen::Index AcquisitionFunction::num_rows() const {
  return kind_ == AcquisitionKind::okg ? q_ + ctx_.base_samples.num_samples() : q_;
}

AcquisitionValue AcquisitionFunction::run(const MatrixXd& X, bool need_grad) const {
  if (X.rows() != num_rows() || X.cols() != dim()) {
    throw ShapeError("acquisition: expected a " + std::to_string(num_rows()) + "×" + std::to_string(dim()) +
                     " candidate set");
  }
  switch (kind_) {
    case AcquisitionKind::analytic_ei: {
      AcquisitionValue v = analytic_ei(*ctx_.model, X, ctx_.params.best_f);
      return v;
    }
    case AcquisitionKind::qei: return qei(ctx_, X, need_grad);
    case AcquisitionKind::qnei: return qnei(ctx_, X, need_grad, *baseline_);
    case AcquisitionKind::qucb: return qucb(ctx_, X, need_grad);
    case AcquisitionKind::simple_regret: return simple_regret(ctx_, X, need_grad);
    case AcquisitionKind::okg: return okg(ctx_, X, need_grad);
    case AcquisitionKind::nipv: return nipv(ctx_, X, need_grad);
  }
  throw ConfigError("acquisition: unknown kind");
}

AcquisitionValue AcquisitionFunction::evaluate(const MatrixXd& X) const {
  return run(X, true);
}

double AcquisitionFunction::value(const MatrixXd& X) const {
  return run(X, false).value;
}

AcquisitionFunction AcquisitionFunction::rebuild(Eigen::Index q, const MatrixXd& pending) const {
  AcquisitionContext ctx = ctx_;
  ctx.X_pending = pending.size() == 0 ? MatrixXd(0, dim()) : pending;
  ctx.base_samples = BaseSampleSet();
  ctx.inner_base_samples = BaseSampleSet();
  return AcquisitionFunction(kind_, std::move(ctx), q);
}

}  // namespace saabo
