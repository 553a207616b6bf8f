#include "saabo/acquisition.hpp"
#include "saabo/errors.hpp"
#include "saabo/objectives.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace saabo;
using saabo::testing::Gen;
using saabo::testing::fd_gradient;
using saabo::testing::relative_error;

namespace {

AcquisitionContext make_ctx(std::shared_ptr<const ModelList> model, std::uint64_t seed, Eigen::Index N = 256) {
  AcquisitionContext ctx;
  ctx.model = std::move(model);
  ctx.objective = ObjectiveSpec::identity();
  ctx.sampler = {SampleMode::rqmc, seed, N};
  return ctx;
}

double closed_form_ei(double mu, double sigma, double best) {
  const double z = (mu - best) / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.141592653589793);
  return sigma * (z * cdf + pdf);
}

void check_gradient(const AcquisitionFunction& a, const MatrixXd& X, double tol = 1e-4) {
  const AcquisitionValue v = a.evaluate(X);
  EXPECT_NEAR(v.value, a.value(X), 1e-12 * std::max(1.0, std::abs(v.value)));
  const MatrixXd fd = fd_gradient([&](const MatrixXd& x) { return a.value(x); }, X);
  EXPECT_LT(relative_error(v.grad, fd, 1e-4), tol) << "analytic\n" << v.grad << "\nfd\n" << fd;
}

}  // namespace

TEST(Objectives, VjpMatchesFiniteDifferences) {
  Gen g(1);
  const std::vector<ObjectiveSpec> objs = {
      ObjectiveSpec::identity(),
      ObjectiveSpec::linear((VectorXd(3) << 0.5, -1.0, 2.0).finished()),
      ObjectiveSpec::chebyshev((VectorXd(3) << 0.2, 0.3, 0.5).finished()),
      ObjectiveSpec::feasibility_weighted(0, {1, 2}, 0.3),
      ObjectiveSpec::generic(
          [](const VectorXd& y, VectorXd* grad) {
            if (grad) *grad = (VectorXd(3) << 2.0 * y(0), std::cos(y(1)), 1.0).finished();
            return y(0) * y(0) + std::sin(y(1)) + y(2);
          },
          3),
  };
  for (const auto& obj : objs) {
    const Eigen::Index m = obj.kind == ObjectiveKind::identity ? 1 : 3, q = 2, N = 5;
    const MatrixXd xi = g.normal_matrix(N, q * m);
    const MatrixXd G = g.normal_matrix(N, q);
    const MatrixXd analytic = objective_vjp(obj, xi, q, G);
    const auto f = [&](const MatrixXd& x) { return (apply_objective(obj, x, q).array() * G.array()).sum(); };
    EXPECT_LT(relative_error(analytic, fd_gradient(f, xi, 1e-6)), 1e-6);
  }
}

TEST(Objectives, FeasibilityWeightIsNearOneWhenDeeplyFeasible) {
  const ObjectiveSpec obj = ObjectiveSpec::feasibility_weighted(0, {1});
  EXPECT_NEAR(obj.evaluate_point((VectorXd(2) << 2.5, -1.0).finished()), 2.5, 1e-12);
  EXPECT_NEAR(obj.evaluate_point((VectorXd(2) << 2.5, 1.0).finished()), 0.0, 1e-12);
}

TEST(Objectives, ChebyshevWeightsOnSimplex) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const VectorXd w = draw_chebyshev_weights(4, s);
    EXPECT_NEAR(w.sum(), 1.0, 1e-14);
    EXPECT_GE(w.minCoeff(), 0.0);
  }
}

TEST(Objectives, ValidationRejectsWrongOutputCount) {
  EXPECT_THROW(ObjectiveSpec::linear(VectorXd::Ones(2)).validate(3), Error);
  EXPECT_THROW(ObjectiveSpec::feasibility_weighted(0, {4}).validate(2), Error);
  EXPECT_THROW(ObjectiveSpec::feasibility_weighted(0, {1}, 0.0).validate(2), Error);
}

TEST(AnalyticEi, MatchesClosedForm) {
  Gen g(2);
  for (int t = 0; t < 20; ++t) {
    const auto model = saabo::testing::random_model(g, 10, 2);
    const MatrixXd x = g.uniform_matrix(1, 2);
    const GaussianPosterior post = model->posterior(x);
    const double best = post.mean(0) + g.uniform(-1.0, 1.0);
    EXPECT_NEAR(analytic_ei(*model, x, best).value, closed_form_ei(post.mean(0), std::sqrt(post.cov(0, 0)), best),
                1e-12);
  }
}

TEST(Qei, SingleOutputOneSampleAgreesWithAnalyticOnAverage) {
  Gen g(3);
  const auto model = saabo::testing::random_model(g, 10, 2);
  const MatrixXd x = g.uniform_matrix(1, 2);
  AcquisitionContext ctx = make_ctx(model, 7, 4096);
  ctx.params.best_f = model->posterior(x).mean(0);
  const AcquisitionFunction a(AcquisitionKind::qei, ctx, 1);
  const double ref = analytic_ei(*model, x, ctx.params.best_f).value;
  EXPECT_NEAR(a.value(x), ref, 1e-3 * ref);
}

TEST(Qei, PendingPointsActLikeExtraBatchRows) {
  Gen g(4);
  const auto model = saabo::testing::random_model(g, 10, 2);
  const MatrixXd X = g.uniform_matrix(2, 2), P = g.uniform_matrix(1, 2);
  AcquisitionContext ctx = make_ctx(model, 9);
  ctx.params.best_f = 0.5;
  const AcquisitionFunction joint(AcquisitionKind::qei, ctx, 3);
  AcquisitionContext pctx = ctx;
  pctx.X_pending = P;
  pctx.base_samples = joint.context().base_samples;
  const AcquisitionFunction pend(AcquisitionKind::qei, pctx, 2);
  MatrixXd XP(3, 2);
  XP << X, P;
  EXPECT_NEAR(pend.value(X), joint.value(XP), 1e-13);
  // A pending point never lowers the batch value.
  AcquisitionContext lone = ctx;
  lone.base_samples = BaseSampleSet(joint.context().base_samples.E().leftCols(2), SampleMode::rqmc, 0);
  EXPECT_LE(AcquisitionFunction(AcquisitionKind::qei, lone, 2).value(X), pend.value(X) + 1e-13);
}

TEST(Qei, PropertyValueNonNegativeAndPermutationInvariant) {
  // Row order changes the Cholesky root, so the two estimates agree only up
  // to the Monte-Carlo error of a large RQMC sample.
  Gen g(5);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index d = g.integer(1, 3), q = g.integer(1, 4);
    const auto model = saabo::testing::random_model(g, 8, d);
    AcquisitionContext ctx = make_ctx(model, g.seed(), 4096);
    ctx.params.best_f = g.uniform(-1.0, 3.0);
    const AcquisitionFunction a(AcquisitionKind::qei, ctx, q);
    const MatrixXd X = g.uniform_matrix(q, d);
    const double v = a.value(X);
    EXPECT_GE(v, 0.0);
    EXPECT_NEAR(v, a.value(X.colwise().reverse()), 0.01 * v + 1e-4);
  }
}

TEST(Qucb, MatchesClosedFormAtQ1) {
  Gen g(6);
  const auto model = saabo::testing::random_model(g, 10, 2);
  const MatrixXd x = g.uniform_matrix(1, 2);
  const GaussianPosterior post = model->posterior(x);
  for (double beta : {0.2, 1.0, 4.0}) {
    AcquisitionContext ctx = make_ctx(model, 8, 8192);
    ctx.params.beta = beta;
    const double sd = std::sqrt(post.cov(0, 0));
    EXPECT_NEAR(AcquisitionFunction(AcquisitionKind::qucb, ctx, 1).value(x), post.mean(0) + std::sqrt(beta) * sd,
                1e-3 * sd);
  }
}

TEST(Qucb, NearZeroVarianceGivesMean) {
  MatrixXd X(2, 1);
  X << 0.2, 0.8;
  KernelParams p;
  p.lengthscales = VectorXd::Constant(1, 0.3);
  auto model = std::make_shared<const ModelList>(
      GPModel(Dataset(X, VectorXd::Ones(2), MatrixXd::Constant(2, 1, 1e-12)), p));
  AcquisitionContext ctx = make_ctx(model, 1, 64);
  const AcquisitionFunction a(AcquisitionKind::qucb, ctx, 1);
  const MatrixXd x = X.topRows(1);
  EXPECT_NEAR(a.value(x), model->posterior(x).mean(0), 1e-5);
}

TEST(Qnei, NoiselessLimitMatchesQei) {
  Gen g(7);
  const Eigen::Index n = 8;
  const MatrixXd Xt = g.uniform_matrix(n, 2);
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = saabo::testing::smooth_response(Xt.row(i).transpose(), 0);
  KernelParams p;
  p.lengthscales = VectorXd::Constant(2, 0.4);
  p.mean_const = y.mean();
  auto model = std::make_shared<const ModelList>(GPModel(Dataset(Xt, y, MatrixXd::Constant(n, 1, 1e-10)), p));
  const MatrixXd X = g.uniform_matrix(2, 2);
  AcquisitionContext ctx = make_ctx(model, 3, 512);
  const double qnei = AcquisitionFunction(AcquisitionKind::qnei, ctx, 2).value(X);
  ctx.params.best_f = y.maxCoeff();
  const double qei = AcquisitionFunction(AcquisitionKind::qei, ctx, 2).value(X);
  EXPECT_NEAR(qnei, qei, 1e-3);
}

TEST(SimpleRegret, AffineObjectiveUsesPosteriorMean) {
  Gen g(8);
  const auto model = saabo::testing::random_model(g, 10, 2, 2);
  AcquisitionContext ctx = make_ctx(model, 3);
  ctx.objective = ObjectiveSpec::linear((VectorXd(2) << 0.25, 0.75).finished());
  const MatrixXd x = g.uniform_matrix(1, 2);
  const double expected =
      0.25 * (*model)[0].posterior_mean(x)(0) + 0.75 * (*model)[1].posterior_mean(x)(0);
  EXPECT_NEAR(AcquisitionFunction(AcquisitionKind::simple_regret, ctx, 1).value(x), expected, 1e-13);
}

TEST(Nipv, ObservingReducesIntegratedVariance) {
  Gen g(9);
  const auto model = saabo::testing::random_model(g, 6, 2);
  AcquisitionContext ctx = make_ctx(model, 1);
  ctx.params.mc_points = g.uniform_matrix(200, 2);
  const AcquisitionFunction a(AcquisitionKind::nipv, ctx, 2);
  const double prior = -(*model)[0].posterior_variance(ctx.params.mc_points).mean();
  for (int t = 0; t < 10; ++t) EXPECT_GE(a.value(g.uniform_matrix(2, 2)), prior - 1e-14);
}

TEST(OneShotKg, MatchesFantasyMeansAtFixedInnerPoints) {
  // With every x′ fixed, the one-shot value is the average fantasy posterior
  // mean at x′ minus mu_star; the oracle goes through fantasize().
  Gen g(10);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index d = g.integer(1, 3);
    const auto model = saabo::testing::random_model(g, 10, d);
    AcquisitionContext ctx = make_ctx(model, g.seed());
    ctx.params.num_fantasies = 8;
    ctx.params.mu_star = g.uniform(0.0, 1.0);
    const AcquisitionFunction a(AcquisitionKind::okg, ctx, 1);
    const MatrixXd X = g.uniform_matrix(9, d);
    const std::vector<GPModel> fant = (*model)[0].fantasize(X.topRows(1), a.context().base_samples.E());
    double expected = 0.0;
    for (int i = 0; i < 8; ++i) expected += fant[static_cast<std::size_t>(i)].posterior_mean(X.row(1 + i))(0);
    expected = expected / 8.0 - *ctx.params.mu_star;
    EXPECT_NEAR(a.value(X), expected, 1e-10);
  }
}

TEST(Acquisition, GradientsMatchFiniteDifferences) {
  Gen g(11);
  for (int t = 0; t < 6; ++t) {
    const Eigen::Index d = g.integer(1, 3), q = g.integer(1, 3), m = t % 2 == 0 ? 1 : 2;
    const auto model = saabo::testing::random_model(g, 10, d, m, 1e-3, 1e-2);
    AcquisitionContext ctx = make_ctx(model, g.seed(), 64);
    ctx.objective = m == 1 ? ObjectiveSpec::identity() : ObjectiveSpec::feasibility_weighted(0, {1}, 0.5);
    ctx.params.best_f = 0.3;
    ctx.params.mu_star = 0.8;
    ctx.params.num_fantasies = 4;
    ctx.params.num_inner_samples = 8;
    ctx.params.mc_points = g.uniform_matrix(30, d);
    ctx.X_pending = g.uniform_matrix(1, d);
    for (AcquisitionKind kind : {AcquisitionKind::qei, AcquisitionKind::qnei, AcquisitionKind::qucb,
                                 AcquisitionKind::simple_regret, AcquisitionKind::okg, AcquisitionKind::nipv}) {
      if (kind == AcquisitionKind::nipv && m != 1) continue;
      SCOPED_TRACE(to_string(kind));
      const AcquisitionFunction a(kind, ctx, q);
      check_gradient(a, g.uniform_matrix(a.num_rows(), d, 0.05, 0.95));
    }
  }
}

TEST(Acquisition, ShapeErrors) {
  Gen g(12);
  const auto model = saabo::testing::random_model(g, 5, 2);
  AcquisitionContext ctx = make_ctx(model, 1);
  const AcquisitionFunction a(AcquisitionKind::qei, ctx, 2);
  EXPECT_THROW(a.value(MatrixXd::Zero(3, 2)), ShapeError);
  EXPECT_THROW(a.value(MatrixXd::Zero(2, 3)), ShapeError);
  EXPECT_THROW(AcquisitionFunction(AcquisitionKind::okg, ctx, 1), ConfigError);
  EXPECT_THROW(AcquisitionFunction(AcquisitionKind::nipv, ctx, 1), ConfigError);
  EXPECT_THROW(parse_acquisition_kind("ei"), ConfigError);
}

TEST(Acquisition, RebuildRedrawsSamplesForNewShape) {
  Gen g(13);
  const auto model = saabo::testing::random_model(g, 5, 2);
  const AcquisitionFunction a(AcquisitionKind::qei, make_ctx(model, 1, 32), 1);
  const AcquisitionFunction b = a.rebuild(1, g.uniform_matrix(2, 2));
  EXPECT_EQ(b.context().base_samples.dim(), 3);
  EXPECT_EQ(b.context().X_pending.rows(), 2);
}
