#pragma once

#include "saabo/types.hpp"

#include <functional>
#include <string>

namespace saabo {

enum class Sense { minimize, maximize };

struct QuasiNewtonConfig {
  int maxiter = 200;
  double grad_tol = 1e-6;  ///< projected-gradient ∞-norm
  double ftol = 1e-15;     ///< relative reduction of f between iterations
  int history = 10;
  int max_linesearch = 40;
};

struct QuasiNewtonResult {
  VectorXd x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  std::string message;
};

/// f(x, grad) returns the objective and writes its gradient into `grad`.
using ObjectiveWithGrad = std::function<double(const VectorXd& x, VectorXd& grad)>;

/// Box-constrained limited-memory BFGS with gradient projection. Every
/// evaluation point lies inside `bounds`. Non-finite objective values are
/// treated as failed trial steps. On line-search failure the best iterate is
/// returned with converged = false.
QuasiNewtonResult bounded_quasi_newton(const ObjectiveWithGrad& f, const VectorXd& x0,
                                       const Bounds& bounds, Sense sense = Sense::minimize,
                                       const QuasiNewtonConfig& config = {});

}  // namespace saabo
