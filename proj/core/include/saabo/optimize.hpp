#pragma once

#include "saabo/acquisition.hpp"
#include "saabo/lbfgsb.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace saabo {

enum class BatchMode { joint, sequential_greedy };

struct OptimizeConfig {
  Bounds bounds;
  Eigen::Index q = 1;
  Eigen::Index raw_samples = 0;  ///< Ñ₀; 0 means 1024·q
  int num_restarts = 20;         ///< N₀
  double eta = 1.0;              ///< Boltzmann temperature η
  int maxiter = 200;
  double grad_tol = 1e-6;
  double ftol = 1e-12;
  BatchMode mode = BatchMode::joint;

  Eigen::Index effective_raw_samples() const { return raw_samples > 0 ? raw_samples : 1024 * q; }
  /// Throws ConfigError on invalid settings.
  void validate(Eigen::Index d) const;
};

struct CandidateResult {
  MatrixXd X_star;               ///< q×d
  double value = 0.0;            ///< acquisition value at X_star
  VectorXd restart_values;       ///< one entry per restart
  std::vector<bool> converged;   ///< one entry per restart
  MatrixXd fantasy_points;       ///< one-shot KG only: optimized x′, N×d
};

/// Anything the optimizer can maximize: `rows`×`dim` candidate sets, a value
/// with gradient, and a cheaper value-only path.
struct BatchObjective {
  Eigen::Index rows = 1;
  Eigen::Index dim = 1;
  std::function<AcquisitionValue(const MatrixXd&)> evaluate;
  std::function<double(const MatrixXd&)> value;
};

BatchObjective as_batch_objective(const AcquisitionFunction& acqf);

/// Boltzmann sampling without replacement: k indices drawn with probability
/// ∝ exp(η·v), v the standardized values. Falls back to uniform selection
/// when the values are flat. Non-finite entries are never selected.
std::vector<Eigen::Index> boltzmann_select(const VectorXd& values, Eigen::Index k, double eta, std::uint64_t seed);

/// Initial conditions: Ñ₀ scrambled Sobol tuples in the box, Boltzmann
/// selection of N₀ of them. Each start is rows×d.
std::vector<MatrixXd> gen_initial_conditions(const BatchObjective& f, const OptimizeConfig& config,
                                             std::uint64_t seed);
std::vector<MatrixXd> gen_initial_conditions(const AcquisitionFunction& acqf, const OptimizeConfig& config,
                                             std::uint64_t seed);

/// Multi-start bounded quasi-Newton from the given start points. Starts with
/// a vanishing gradient are kept as they are. Throws OptimizationError when
/// every restart fails.
CandidateResult optimize_from_starts(const BatchObjective& f, const std::vector<MatrixXd>& starts,
                                     const OptimizeConfig& config);

/// Joint maximization of f (config.mode is ignored).
CandidateResult optimize_acqf(const BatchObjective& f, const OptimizeConfig& config, std::uint64_t seed);

/// Joint or sequential-greedy maximization. Sequential greedy picks one point
/// at a time, adding each pick to the pending set of a rebuilt acquisition.
CandidateResult optimize_acqf(const AcquisitionFunction& acqf, const OptimizeConfig& config, std::uint64_t seed);

/// Maximizes one-shot KG over the (q + N)·d augmented variable and returns
/// the first q rows as the candidate. config.q is ignored in favour of acqf.q().
CandidateResult optimize_one_shot_kg(const AcquisitionFunction& acqf_kg, const OptimizeConfig& config,
                                     std::uint64_t seed);

/// max over the box of the posterior expectation of g (q = 1 simple regret),
/// by multi-start maximization with `restarts` starts.
double compute_mu_star(std::shared_ptr<const ModelList> model, const ObjectiveSpec& objective, const Bounds& bounds,
                       std::uint64_t seed, int restarts = 10, const SamplerSpec& sampler = {});

/// Argmax of the same quantity, 1×d.
MatrixXd maximize_posterior_mean(std::shared_ptr<const ModelList> model, const ObjectiveSpec& objective,
                                 const Bounds& bounds, std::uint64_t seed, int restarts = 10,
                                 const SamplerSpec& sampler = {}, double* max_value = nullptr);

}  // namespace saabo
