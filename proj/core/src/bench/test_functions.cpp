#include "saabo/bench/test_functions.hpp"

#include "saabo/errors.hpp"
#include "saabo/normal.hpp"

#include <cmath>
#include <numbers>

namespace saabo::bench {

namespace {

constexpr double kPi = std::numbers::pi;

double branin(const VectorXd& x) {
  const double b = 5.1 / (4.0 * kPi * kPi), c = 5.0 / kPi, t = 1.0 / (8.0 * kPi);
  const double u = x(1) - b * x(0) * x(0) + c * x(0) - 6.0;
  return u * u + 10.0 * (1.0 - t) * std::cos(x(0)) + 10.0;
}

double rosenbrock(const VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    s += 100.0 * std::pow(x(i + 1) - x(i) * x(i), 2) + std::pow(1.0 - x(i), 2);
  }
  return s;
}

double ackley(const VectorXd& x) {
  const double n = static_cast<double>(x.size());
  const double s1 = x.squaredNorm() / n;
  const double s2 = (2.0 * kPi * x.array()).cos().sum() / n;
  return -20.0 * std::exp(-0.2 * std::sqrt(s1)) - std::exp(s2) + 20.0 + std::numbers::e;
}

double hartmann6(const VectorXd& x) {
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  static const double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                 {0.05, 10, 17, 0.1, 8, 14},
                                 {3, 3.5, 1.7, 10, 17, 8},
                                 {17, 8, 0.05, 10, 0.1, 14}};
  static const double P[4][6] = {{1312, 1696, 5569, 124, 8283, 5886},
                                 {2329, 4135, 8307, 3736, 1004, 9991},
                                 {2348, 1451, 3522, 2883, 3047, 6650},
                                 {4047, 8828, 8732, 5743, 1091, 381}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) inner += A[i][j] * std::pow(x(j) - 1e-4 * P[i][j], 2);
    s += alpha[i] * std::exp(-inner);
  }
  return -s;
}

void check_domain(const TestFunction& fn, const VectorXd& x) {
  if (x.size() != fn.dim) throw ShapeError(fn.name + ": expected a point of dimension " + std::to_string(fn.dim));
  const double tol = 1e-12;
  if (((x - fn.bounds.lower).array() < -tol).any() || ((x - fn.bounds.upper).array() > tol).any()) {
    throw DomainError(fn.name + ": point outside the domain");
  }
}

}  // namespace

std::vector<std::string> test_function_names() {
  return {"branin", "rosenbrock", "ackley", "hartmann6", "hartmann6_constrained_l1", "hartmann6_constrained_l2"};
}

TestFunction make_test_function(const std::string& name) {
  TestFunction f;
  f.name = name;
  if (name == "branin") {
    f.dim = 2;
    f.bounds = Bounds((VectorXd(2) << -5.0, 0.0).finished(), (VectorXd(2) << 10.0, 15.0).finished());
    f.known_optimum = 0.397887357729738;
    f.minimizers.resize(3, 2);
    f.minimizers << -kPi, 12.275, kPi, 2.275, 3.0 * kPi, 2.475;
  } else if (name == "rosenbrock") {
    f.dim = 3;
    f.bounds = Bounds(VectorXd::Constant(3, -5.0), VectorXd::Constant(3, 10.0));
    f.known_optimum = 0.0;
    f.minimizers = MatrixXd::Ones(1, 3);
  } else if (name == "ackley") {
    f.dim = 5;
    f.bounds = Bounds(VectorXd::Constant(5, -32.768), VectorXd::Constant(5, 32.768));
    f.known_optimum = 0.0;
    f.minimizers = MatrixXd::Zero(1, 5);
  } else if (name == "hartmann6" || name == "hartmann6_constrained_l1" || name == "hartmann6_constrained_l2") {
    f.dim = 6;
    f.bounds = Bounds::unit_cube(6);
    f.known_optimum = -3.32236801141551;
    f.minimizers.resize(1, 6);
    f.minimizers << 0.20168951265373, 0.15001069271526, 0.47687397631418, 0.27533243098986, 0.31165162148095,
        0.65730053545780;
    f.constrained = name != "hartmann6";
  } else {
    throw ConfigError("unknown test function '" + name + "'");
  }
  return f;
}

double NoiseStream::normal() {
  const std::uint64_t bits = mix64(seed_ ^ mix64(counter_++)) >> 11;
  return inverse_normal_cdf((static_cast<double>(bits) + 0.5) * 0x1.0p-53);
}

double eval_test_function(const TestFunction& fn, const VectorXd& x, bool noisy, NoiseStream* rng) {
  check_domain(fn, x);
  double v;
  if (fn.name == "branin") {
    v = branin(x);
  } else if (fn.name == "rosenbrock") {
    v = rosenbrock(x);
  } else if (fn.name == "ackley") {
    v = ackley(x);
  } else {
    v = hartmann6(x);
  }
  if (noisy) {
    if (!rng) throw ConfigError("eval_test_function: noisy evaluation needs a noise stream");
    v += fn.noise_sd * rng->normal();
  }
  return v;
}

double eval_constraint(const TestFunction& fn, const VectorXd& x, bool noisy, NoiseStream* rng) {
  check_domain(fn, x);
  if (!fn.constrained) throw ConfigError(fn.name + " has no constraint");
  double c = fn.name == "hartmann6_constrained_l1" ? x.lpNorm<1>() - 3.0 : x.norm() - 1.0;
  if (noisy) {
    if (!rng) throw ConfigError("eval_constraint: noisy evaluation needs a noise stream");
    c += fn.noise_sd * rng->normal();
  }
  return c;
}

VectorXd observe(const TestFunction& fn, const VectorXd& x, bool noisy, NoiseStream* rng) {
  VectorXd y(fn.num_outputs());
  y(0) = -eval_test_function(fn, x, noisy, rng);
  if (fn.constrained) y(1) = eval_constraint(fn, x, noisy, rng);
  return y;
}

double true_value(const TestFunction& fn, const VectorXd& x) {
  const double f = -eval_test_function(fn, x, false, nullptr);
  if (fn.constrained && eval_constraint(fn, x, false, nullptr) > 0.0) return 0.0;
  return f;
}

}  // namespace saabo::bench
