#pragma once

#include "saabo/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace saabo::bench {

/// Synthetic benchmark problem in the usual minimization form.
struct TestFunction {
  std::string name;
  Eigen::Index dim = 0;
  Bounds bounds;
  double noise_sd = 0.5;
  double known_optimum = 0.0;  ///< minimum of the objective
  MatrixXd minimizers;         ///< known minimizers, one per row
  bool constrained = false;    ///< second output c(x), feasible ⇔ c(x) ≤ 0

  /// Number of modeled outputs: 1, or 2 with a constraint.
  Eigen::Index num_outputs() const { return constrained ? 2 : 1; }
};

/// branin, rosenbrock, ackley, hartmann6, hartmann6_constrained_l1,
/// hartmann6_constrained_l2. Throws ConfigError for unknown names.
TestFunction make_test_function(const std::string& name);
std::vector<std::string> test_function_names();

/// Counter-based Gaussian noise stream.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Literature value of the objective (minimization form), plus N(0, sd²)
/// noise when `noisy`. Throws DomainError for points outside the box.
double eval_test_function(const TestFunction& fn, const VectorXd& x, bool noisy, NoiseStream* rng);

/// Constraint value c(x) (feasible ⇔ c ≤ 0), optionally noisy.
double eval_constraint(const TestFunction& fn, const VectorXd& x, bool noisy, NoiseStream* rng);

/// Observations in the maximization convention used by the optimizer:
/// [−f(x)] or [−f(x), c(x)].
VectorXd observe(const TestFunction& fn, const VectorXd& x, bool noisy, NoiseStream* rng);

/// Noiseless value to maximize: −f(x), or 0 when a constrained point is infeasible.
double true_value(const TestFunction& fn, const VectorXd& x);

}  // namespace saabo::bench
