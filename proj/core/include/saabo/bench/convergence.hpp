#pragma once

#include "saabo/acquisition.hpp"
#include "saabo/sampling.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace saabo::bench {

/// Single-output posterior with a q = 1 analytic EI ground truth.
struct EiFixture {
  std::shared_ptr<const ModelList> model;
  Bounds bounds;
  double best_f = 0.0;
  MatrixXd x_star;  ///< 1×d argmax of analytic EI
  double ei_star = 0.0;
};

/// Dense multi-start maximization of analytic EI on the given model.
EiFixture make_ei_fixture(std::shared_ptr<const ModelList> model, const Bounds& bounds, double best_f,
                          std::uint64_t seed);

/// GP fit to `n` uniform random points in [0,1]^6 of the negated Hartmann6
/// function; best_f is the best observed value.
EiFixture make_hartmann6_fixture(std::uint64_t seed, Eigen::Index n = 15);

enum class ConvergenceOptimizer { saa, resample_adam };
std::string to_string(ConvergenceOptimizer opt);
ConvergenceOptimizer parse_convergence_optimizer(const std::string& name);

struct ConvergenceConfig {
  std::vector<long long> sizes;  ///< explicit sizes; when empty, `schedule` is used
  SampleSizeSchedule schedule{2, 1, 12};
  long long min_size = 16;       ///< schedule entries below this are dropped
  std::vector<SampleMode> modes{SampleMode::iid, SampleMode::rqmc};
  std::vector<ConvergenceOptimizer> optimizers{ConvergenceOptimizer::saa};
  int replications = 100;
  std::uint64_t seed = 0;
  std::uint64_t fixture_seed = 0;
  Eigen::Index fixture_points = 15;
  int num_restarts = 4;
  Eigen::Index raw_samples = 256;
  double eta = 1.0;
  int maxiter = 500;
  double grad_tol = 1e-10;
  int adam_steps = 200;
  double adam_lr = 0.025;

  std::vector<long long> effective_sizes() const;
  void validate() const;
};

struct ConvergenceRow {
  long long N = 0;
  SampleMode mode = SampleMode::iid;
  ConvergenceOptimizer optimizer = ConvergenceOptimizer::saa;
  double mean_gap = 0.0, var_gap = 0.0;    ///< 1 − EI(x̂)/EI(x*)
  double mean_dist = 0.0, var_dist = 0.0;  ///< ‖x̂ − x*‖₂
};

/// OLS slopes of log(metric) against log(N); NaN with fewer than two
/// positive entries.
struct ConvergenceSlopes {
  SampleMode mode = SampleMode::iid;
  ConvergenceOptimizer optimizer = ConvergenceOptimizer::saa;
  double mean_gap = 0.0, var_gap = 0.0, mean_dist = 0.0, var_dist = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSlopes> slopes;
};

/// Least-squares slope of log y on log x over pairs with x, y > 0.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

ConvergenceResult run_convergence_study(const EiFixture& fixture, const ConvergenceConfig& config);
/// Builds the Hartmann6 fixture from config.fixture_seed and runs the study.
ConvergenceResult run_convergence_study(const ConvergenceConfig& config);

/// `N,mode,optimizer,mean_gap,var_gap,mean_dist,var_dist`, then one row per
/// (mode, optimizer) with N = "slope".
void write_convergence_csv(std::ostream& out, const ConvergenceResult& result);

}  // namespace saabo::bench
