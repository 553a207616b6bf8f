#include "saabo/lbfgsb.hpp"

#include "saabo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace saabo {

namespace {

struct Pair {
  VectorXd s, y;
};

VectorXd clamp(const VectorXd& x, const Bounds& b) {
  return x.cwiseMax(b.lower).cwiseMin(b.upper);
}

// 1 for coordinates that may move along −g, 0 for those pinned at a bound.
VectorXd free_mask(const VectorXd& x, const VectorXd& g, const Bounds& b) {
  VectorXd m = VectorXd::Ones(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x(i) <= b.lower(i) && g(i) > 0.0) || (x(i) >= b.upper(i) && g(i) < 0.0)) m(i) = 0.0;
  }
  return m;
}

VectorXd two_loop(const VectorXd& g, const VectorXd& mask, const std::deque<Pair>& mem) {
  VectorXd q = g.cwiseProduct(mask);
  const auto k = mem.size();
  std::vector<double> alpha(k, 0.0), rho(k, 0.0);
  double gamma = 1.0;
  bool have_gamma = false;
  for (std::size_t j = k; j-- > 0;) {
    const VectorXd s = mem[j].s.cwiseProduct(mask), y = mem[j].y.cwiseProduct(mask);
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * y.squaredNorm()) || sy <= 0.0) continue;
    rho[j] = 1.0 / sy;
    if (!have_gamma) {
      gamma = sy / y.squaredNorm();
      have_gamma = true;
    }
    alpha[j] = rho[j] * s.dot(q);
    q -= alpha[j] * y;
  }
  q *= gamma;
  for (std::size_t j = 0; j < k; ++j) {
    if (rho[j] == 0.0) continue;
    const VectorXd s = mem[j].s.cwiseProduct(mask), y = mem[j].y.cwiseProduct(mask);
    const double beta = rho[j] * y.dot(q);
    q += (alpha[j] - beta) * s;
  }
  return -q.cwiseProduct(mask);
}

}  // namespace

QuasiNewtonResult bounded_quasi_newton(const ObjectiveWithGrad& f, const VectorXd& x0,
                                       const Bounds& bounds, Sense sense,
                                       const QuasiNewtonConfig& config) {
  if (x0.size() != bounds.dim()) throw ShapeError("bounded_quasi_newton: x0 and bounds differ in size");
  const double sgn = sense == Sense::minimize ? 1.0 : -1.0;
  const Eigen::Index k = x0.size();

  QuasiNewtonResult res;
  auto eval = [&](const VectorXd& x, VectorXd& g) {
    g.setZero(k);
    const double v = sgn * f(x, g);
    g *= sgn;
    ++res.evaluations;
    return v;
  };

  VectorXd x = clamp(x0, bounds), g(k);
  double fx = eval(x, g);
  res.x = x;
  res.value = sgn * fx;
  if (!std::isfinite(fx) || !g.allFinite()) {
    res.message = "non-finite objective at the start point";
    return res;
  }

  const double min_range = bounds.range().minCoeff();
  std::deque<Pair> mem;
  VectorXd g_new(k);
  for (res.iterations = 0; res.iterations < config.maxiter; ++res.iterations) {
    const double pg = (clamp(x - g, bounds) - x).lpNorm<Eigen::Infinity>();
    if (pg <= config.grad_tol) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      break;
    }

    bool accepted = false;
    VectorXd x_new;
    double f_new = 0.0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const VectorXd mask = free_mask(x, g, bounds);
      VectorXd d = two_loop(g, mask, mem);
      double t = 1.0;
      if (mem.empty() || !(g.dot(d) < 0.0)) {
        mem.clear();
        d = -g.cwiseProduct(mask);
        const double dn = d.lpNorm<Eigen::Infinity>();
        if (dn == 0.0) break;
        t = std::min(1.0, 0.1 * min_range / dn);
      }
      for (int ls = 0; ls < config.max_linesearch; ++ls, t *= 0.5) {
        x_new = clamp(x + t * d, bounds);
        const VectorXd step = x_new - x;
        if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
        f_new = eval(x_new, g_new);
        if (std::isfinite(f_new) && g_new.allFinite() && f_new <= fx + 1e-4 * g.dot(step)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) mem.clear();
    }
    if (!accepted) {
      res.message = "line search failed";
      break;
    }

    Pair p{x_new - x, g_new - g};
    if (p.s.dot(p.y) > 1e-12 * p.y.squaredNorm()) {
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > config.history) mem.pop_front();
    }
    const double reduction = fx - f_new;
    x = x_new;
    g = g_new;
    fx = f_new;
    res.x = x;
    res.value = sgn * fx;
    if (reduction <= config.ftol * std::max({std::abs(fx), std::abs(fx + reduction), 1.0})) {
      res.converged = true;
      res.message = "relative reduction of f below tolerance";
      ++res.iterations;
      break;
    }
  }
  if (res.message.empty()) res.message = "maximum iterations reached";
  return res;
}

}  // namespace saabo
