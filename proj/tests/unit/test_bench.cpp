#include "saabo/bench/closed_loop.hpp"
#include "saabo/bench/config.hpp"
#include "saabo/bench/convergence.hpp"
#include "saabo/bench/test_functions.hpp"
#include "saabo/errors.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace saabo;
using namespace saabo::bench;

TEST(TestFunctions, KnownOptimaReproduce) {
  for (const auto& name : test_function_names()) {
    SCOPED_TRACE(name);
    const TestFunction fn = make_test_function(name);
    ASSERT_GT(fn.minimizers.rows(), 0);
    for (Eigen::Index i = 0; i < fn.minimizers.rows(); ++i) {
      EXPECT_NEAR(eval_test_function(fn, fn.minimizers.row(i).transpose(), false, nullptr), fn.known_optimum, 1e-4);
    }
  }
}

TEST(TestFunctions, ReferenceValues) {
  const TestFunction branin = make_test_function("branin");
  EXPECT_NEAR(eval_test_function(branin, (VectorXd(2) << 3.141592653589793, 2.275).finished(), false, nullptr),
              0.397887, 1e-4);
  const TestFunction ackley = make_test_function("ackley");
  EXPECT_NEAR(eval_test_function(ackley, VectorXd::Zero(ackley.dim), false, nullptr), 0.0, 1e-12);
  const TestFunction h6 = make_test_function("hartmann6");
  EXPECT_NEAR(eval_test_function(h6, h6.minimizers.row(0).transpose(), false, nullptr), -3.32237, 1e-4);
  const TestFunction rosen = make_test_function("rosenbrock");
  EXPECT_NEAR(eval_test_function(rosen, VectorXd::Ones(rosen.dim), false, nullptr), 0.0, 1e-12);
}

TEST(TestFunctions, PropertyNoOtherPointBeatsKnownOptimum) {
  saabo::testing::Gen g(3);
  for (const auto& name : test_function_names()) {
    const TestFunction fn = make_test_function(name);
    for (int t = 0; t < 2000; ++t) {
      const VectorXd x = fn.bounds.from_unit(g.uniform_matrix(1, fn.dim)).row(0).transpose();
      EXPECT_GE(eval_test_function(fn, x, false, nullptr), fn.known_optimum - 1e-9);
    }
  }
}

TEST(TestFunctions, OutOfBoundsIsAnError) {
  const TestFunction fn = make_test_function("branin");
  EXPECT_THROW(eval_test_function(fn, (VectorXd(2) << 11.0, 0.0).finished(), false, nullptr), DomainError);
  EXPECT_THROW(make_test_function("sphere"), ConfigError);
}

TEST(TestFunctions, NoiseHasConfiguredSpread) {
  const TestFunction fn = make_test_function("hartmann6");
  NoiseStream rng(1);
  const VectorXd x = VectorXd::Constant(6, 0.5);
  const double f0 = eval_test_function(fn, x, false, nullptr);
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double e = eval_test_function(fn, x, true, &rng) - f0;
    s += e;
    s2 += e * e;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(s2 / n), 0.5, 0.02);
}

TEST(TestFunctions, ConstrainedTrueValue) {
  const TestFunction l1 = make_test_function("hartmann6_constrained_l1");
  ASSERT_TRUE(l1.constrained);
  const VectorXd feasible = VectorXd::Constant(6, 0.2), infeasible = VectorXd::Constant(6, 0.9);
  EXPECT_NEAR(eval_constraint(l1, feasible, false, nullptr), 1.2 - 3.0, 1e-14);
  EXPECT_EQ(true_value(l1, infeasible), 0.0);
  EXPECT_EQ(true_value(l1, feasible), -eval_test_function(l1, feasible, false, nullptr));
  const TestFunction l2 = make_test_function("hartmann6_constrained_l2");
  EXPECT_NEAR(eval_constraint(l2, feasible, false, nullptr), std::sqrt(6 * 0.04) - 1.0, 1e-14);
}

TEST(ClosedLoop, InitialDesignSharedAcrossAlgorithms) {
  const TestFunction fn = make_test_function("branin");
  const MatrixXd a = initial_design(fn, 7, 3), b = initial_design(fn, 7, 3);
  EXPECT_EQ(a.rows(), 2 * fn.dim + 2);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, initial_design(fn, 7, 4));
}

namespace {

RunConfig small_config(const std::string& algorithm) {
  RunConfig c;
  c.function = "branin";
  c.algorithm = algorithm;
  c.q = 2;
  c.iterations = 3;
  c.trials = 2;
  c.seed = 11;
  c.num_samples = 32;
  c.num_fantasies = 4;
  c.num_restarts = 2;
  c.raw_samples = 32;
  c.maxiter = 30;
  c.fit_restarts = 2;
  c.suggestion_restarts = 2;
  c.nipv_mc_points = 32;
  return c;
}

}  // namespace

TEST(ClosedLoop, EveryAlgorithmRunsWithMonotoneBestSoFar) {
  for (const auto& alg : algorithm_names()) {
    SCOPED_TRACE(alg);
    RunConfig c = small_config(alg);
    if (alg == "analytic_ei") c.q = 1;
    const auto recs = run_closed_loop(c);
    ASSERT_EQ(recs.size(), static_cast<std::size_t>(c.trials * c.iterations));
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const TestFunction fn = make_test_function(c.function);
      EXPECT_TRUE(fn.bounds.contains(recs[i].x));
      if (i > 0 && recs[i].trial == recs[i - 1].trial) EXPECT_GE(recs[i].best_so_far, recs[i - 1].best_so_far);
      EXPECT_GE(recs[i].best_so_far, recs[i].true_value);
      EXPECT_EQ(recs[i].wall_ms, 0.0);
    }
  }
}

TEST(ClosedLoop, IdenticalConfigGivesIdenticalCsv) {
  RunConfig c = small_config("qnei");
  std::ostringstream a, b;
  write_trial_csv(a, run_closed_loop(c), 2);
  write_trial_csv(b, run_closed_loop(c), 2);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "trial,iteration,algorithm,suggestion_mode,x1,x2,true_value,best_so_far,wall_ms");
}

TEST(ClosedLoop, ConstrainedRunUsesFeasibleTruth) {
  RunConfig c = small_config("qnei");
  c.function = "hartmann6_constrained_l1";
  c.q = 1;
  c.iterations = 2;
  c.trials = 1;
  const auto recs = run_constrained(c);
  ASSERT_EQ(recs.size(), 2u);
  const TestFunction fn = make_test_function(c.function);
  for (const auto& r : recs) {
    const bool feasible = eval_constraint(fn, r.x, false, nullptr) <= 0.0;
    EXPECT_EQ(r.true_value, feasible ? -eval_test_function(fn, r.x, false, nullptr) : 0.0);
  }
  c.function = "branin";
  EXPECT_THROW(run_constrained(c), ConfigError);
}

TEST(ClosedLoop, InvalidConfigsAreRejected) {
  RunConfig c = small_config("qei");
  c.trials = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config("analytic_ei");
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config("thompson");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, ParsesRunConfig) {
  const RunConfig c = parse_run_config(R"({"function": "hartmann6", "algorithm": "okg", "q": 4,
      "iterations": 30, "trials": 20, "seed": 3, "suggestion_mode": "in_sample", "noise_sd": 0.1,
      "sampler": "iid", "num_samples": 64, "batch_mode": "sequential_greedy"})");
  EXPECT_EQ(c.algorithm, "okg");
  EXPECT_EQ(c.q, 4);
  EXPECT_EQ(c.suggestion_mode, SuggestionMode::in_sample);
  ASSERT_TRUE(c.noise_sd.has_value());
  EXPECT_EQ(*c.noise_sd, 0.1);
  EXPECT_EQ(c.sampler_mode, SampleMode::iid);
  EXPECT_EQ(c.batch_mode, BatchMode::sequential_greedy);
}

TEST(Config, RejectsBadDocuments) {
  EXPECT_THROW(parse_run_config("{"), ConfigError);
  EXPECT_THROW(parse_run_config("[]"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"q": "four"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"qq": 4})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"trials": 0})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"sampler": "sobol"})"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/run.json"), ConfigError);
}

TEST(Config, ParsesConvergenceConfig) {
  const ConvergenceConfig c = parse_convergence_config(
      R"({"schedule": {"base": 2, "M": 1, "k_max": 6}, "min_size": 16, "modes": ["rqmc"],
          "optimizers": ["saa", "resample_adam"], "replications": 5})");
  const std::vector<long long> expected{16, 32, 64};
  EXPECT_EQ(c.effective_sizes(), expected);
  EXPECT_EQ(c.optimizers.size(), 2u);
  EXPECT_THROW(parse_convergence_config(R"({"optimizers": ["sgd"]})"), ConfigError);
}

TEST(Convergence, LogLogSlopeRecoversPowerLaw) {
  std::vector<double> x, y;
  for (double n : {16.0, 32.0, 64.0, 128.0}) {
    x.push_back(n);
    y.push_back(3.0 * std::pow(n, -1.5));
  }
  EXPECT_NEAR(log_log_slope(x, y), -1.5, 1e-12);
  y[0] = 0.0;  // skipped
  EXPECT_NEAR(log_log_slope(x, y), -1.5, 1e-12);
  EXPECT_TRUE(std::isnan(log_log_slope({1.0}, {1.0})));
}

TEST(Convergence, SmallStudyProducesRowsAndNonNegativeGaps) {
  ConvergenceConfig c;
  c.sizes = {16, 64};
  c.replications = 3;
  c.optimizers = {ConvergenceOptimizer::saa, ConvergenceOptimizer::resample_adam};
  c.adam_steps = 10;
  c.num_restarts = 2;
  c.raw_samples = 32;
  const ConvergenceResult r = run_convergence_study(c);
  ASSERT_EQ(r.rows.size(), 8u);
  ASSERT_EQ(r.slopes.size(), 4u);
  for (const auto& row : r.rows) {
    EXPECT_GE(row.mean_gap, -1e-9);
    EXPECT_GE(row.mean_dist, 0.0);
  }
  std::ostringstream out;
  write_convergence_csv(out, r);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "N,mode,optimizer,mean_gap,var_gap,mean_dist,var_dist");
}
