#pragma once

#include "saabo/bench/test_functions.hpp"
#include "saabo/optimize.hpp"
#include "saabo/sampling.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace saabo::bench {

enum class SuggestionMode { in_sample, out_of_sample };

std::string to_string(SuggestionMode mode);
SuggestionMode parse_suggestion_mode(const std::string& name);

/// Algorithms the closed-loop runner understands.
std::vector<std::string> algorithm_names();

struct RunConfig {
  std::string function = "hartmann6";
  std::string algorithm = "qnei";  ///< sobol_random, analytic_ei, qei, qnei, qucb, okg, nipv
  Eigen::Index q = 1;
  int iterations = 10;
  int trials = 1;
  std::uint64_t seed = 0;
  SuggestionMode suggestion_mode = SuggestionMode::out_of_sample;
  std::optional<double> noise_sd;  ///< overrides the function default (0.5)
  SampleMode sampler_mode = SampleMode::rqmc;
  Eigen::Index num_samples = 128;  ///< N for qEI / qNEI / qUCB

  // Engine settings.
  Eigen::Index num_fantasies = 64;
  Eigen::Index num_inner_samples = 32;
  double beta = 0.2;
  Eigen::Index nipv_mc_points = 256;
  std::optional<double> tau;  ///< feasibility temperature; default 1e-3 × constraint scale
  int num_restarts = 20;
  Eigen::Index raw_samples = 0;  ///< 0 means 1024·q
  double eta = 1.0;
  int maxiter = 200;
  double grad_tol = 1e-6;
  BatchMode batch_mode = BatchMode::joint;
  int fit_restarts = 8;
  int fit_maxiter = 200;
  bool warm_start_fit = true;
  int suggestion_restarts = 10;
  bool record_wall_time = false;

  /// Throws ConfigError on invalid settings.
  void validate() const;
};

struct TrialRecord {
  int trial = 0;
  int iteration = 0;
  std::string algorithm;
  SuggestionMode suggestion_mode = SuggestionMode::out_of_sample;
  VectorXd x;
  double true_value = 0.0;
  double best_so_far = 0.0;
  double wall_ms = 0.0;
};

/// 2d+2 scrambled Sobol points shared by every algorithm run with this seed and trial.
MatrixXd initial_design(const TestFunction& fn, std::uint64_t seed, int trial);

/// Closed-loop Bayesian optimization; dispatches to run_constrained for the
/// constrained test functions. Returns trials × iterations records.
std::vector<TrialRecord> run_closed_loop(const RunConfig& config);

/// Constrained variant: independent GPs for objective and constraint, driven
/// through a feasibility-weighted objective. Infeasible suggestions score 0.
std::vector<TrialRecord> run_constrained(const RunConfig& config);

/// CSV with header trial,iteration,algorithm,suggestion_mode,x1..xd,true_value,best_so_far,wall_ms.
void write_trial_csv(std::ostream& out, const std::vector<TrialRecord>& records, Eigen::Index dim);

}  // namespace saabo::bench
