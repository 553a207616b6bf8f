#include "saabo/objectives.hpp"

#include "saabo/errors.hpp"

#include <cmath>

namespace saabo {

ObjectiveSpec ObjectiveSpec::identity() {
  return {};
}

ObjectiveSpec ObjectiveSpec::linear(VectorXd weights) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::linear;
  s.weights = std::move(weights);
  return s;
}

ObjectiveSpec ObjectiveSpec::chebyshev(VectorXd weights, double rho) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::chebyshev;
  s.weights = std::move(weights);
  s.rho = rho;
  if ((s.weights.array() < 0.0).any() || std::abs(s.weights.sum() - 1.0) > 1e-9) {
    throw ConfigError("chebyshev weights must be nonnegative and sum to 1");
  }
  return s;
}

ObjectiveSpec ObjectiveSpec::feasibility_weighted(int objective_index, std::vector<int> constraint_indices,
                                                  double tau) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::feasibility_weighted;
  s.objective_index = objective_index;
  s.constraint_indices = std::move(constraint_indices);
  s.tau = tau;
  if (!(tau > 0.0)) throw ConfigError("feasibility temperature tau must be positive");
  return s;
}

ObjectiveSpec ObjectiveSpec::generic(ObjectiveCallback fn, int num_outputs) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::generic;
  s.callback = std::move(fn);
  s.generic_outputs = num_outputs;
  return s;
}

VectorXd ObjectiveSpec::affine_weights(Eigen::Index m) const {
  if (kind == ObjectiveKind::identity) return VectorXd::Ones(m);
  if (kind == ObjectiveKind::linear) return weights;
  throw ConfigError("objective is not affine");
}

void ObjectiveSpec::validate(Eigen::Index m) const {
  switch (kind) {
    case ObjectiveKind::identity:
      if (m != 1) throw ShapeError("identity objective requires a single output; use linear or chebyshev");
      break;
    case ObjectiveKind::linear:
    case ObjectiveKind::chebyshev:
      if (weights.size() != m) throw ShapeError("objective weights must have one entry per output");
      break;
    case ObjectiveKind::feasibility_weighted: {
      auto check = [m](int i) {
        if (i < 0 || i >= m) throw ShapeError("feasibility objective: output index out of range");
      };
      check(objective_index);
      for (int c : constraint_indices) check(c);
      if (!(tau > 0.0)) throw ConfigError("feasibility temperature tau must be positive");
      break;
    }
    case ObjectiveKind::generic:
      if (!callback) throw ConfigError("generic objective requires a callback");
      if (generic_outputs != m) throw ShapeError("generic objective output count mismatch");
      break;
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double ObjectiveSpec::evaluate_point(const VectorXd& y, VectorXd* grad) const {
  const Eigen::Index m = y.size();
  if (grad) grad->setZero(m);
  switch (kind) {
    case ObjectiveKind::identity:
      if (grad) (*grad)(0) = 1.0;
      return y(0);
    case ObjectiveKind::linear:
      if (grad) *grad = weights;
      return weights.dot(y);
    case ObjectiveKind::chebyshev: {
      Eigen::Index jmin = 0;
      double vmin = weights(0) * y(0);
      for (Eigen::Index j = 1; j < m; ++j) {
        if (weights(j) * y(j) < vmin) {
          vmin = weights(j) * y(j);
          jmin = j;
        }
      }
      if (grad) {
        *grad = rho * weights;
        (*grad)(jmin) += weights(jmin);
      }
      return rho * weights.dot(y) + vmin;
    }
    case ObjectiveKind::feasibility_weighted: {
      double w = 1.0;
      for (int c : constraint_indices) w *= sigmoid(-y(c) / tau);
      const double obj = y(objective_index);
      if (grad) {
        (*grad)(objective_index) += w;
        for (int c : constraint_indices) {
          const double s = sigmoid(-y(c) / tau);
          // ∂/∂c of obj·Π s = obj·w·(−(1 − s)/τ)
          (*grad)(c) += obj * w * (-(1.0 - s) / tau);
        }
      }
      return obj * w;
    }
    case ObjectiveKind::generic:
      return callback(y, grad);
  }
  return 0.0;
}

MatrixXd apply_objective(const ObjectiveSpec& obj, const MatrixXd& xi, Eigen::Index q) {
  if (q < 1 || xi.cols() % q != 0) throw ShapeError("apply_objective: sample columns must be a multiple of q");
  const Eigen::Index m = xi.cols() / q, N = xi.rows();
  obj.validate(m);
  if (obj.kind == ObjectiveKind::identity) return xi;
  MatrixXd out(N, q);
  if (obj.kind == ObjectiveKind::linear) {
    out.setZero();
    for (Eigen::Index j = 0; j < m; ++j) out += obj.weights(j) * xi.middleCols(j * q, q);
    return out;
  }
  VectorXd y(m);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index k = 0; k < q; ++k) {
      for (Eigen::Index j = 0; j < m; ++j) y(j) = xi(i, j * q + k);
      out(i, k) = obj.evaluate_point(y);
    }
  }
  return out;
}

MatrixXd objective_vjp(const ObjectiveSpec& obj, const MatrixXd& xi, Eigen::Index q, const MatrixXd& G) {
  const Eigen::Index m = xi.cols() / q, N = xi.rows();
  if (G.rows() != N || G.cols() != q) throw ShapeError("objective_vjp: upstream gradient shape mismatch");
  if (obj.kind == ObjectiveKind::identity) return G;
  MatrixXd out(N, m * q);
  if (obj.kind == ObjectiveKind::linear) {
    for (Eigen::Index j = 0; j < m; ++j) out.middleCols(j * q, q) = obj.weights(j) * G;
    return out;
  }
  VectorXd y(m), g(m);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index k = 0; k < q; ++k) {
      if (G(i, k) == 0.0) {
        for (Eigen::Index j = 0; j < m; ++j) out(i, j * q + k) = 0.0;
        continue;
      }
      for (Eigen::Index j = 0; j < m; ++j) y(j) = xi(i, j * q + k);
      obj.evaluate_point(y, &g);
      for (Eigen::Index j = 0; j < m; ++j) out(i, j * q + k) = G(i, k) * g(j);
    }
  }
  return out;
}

VectorXd draw_chebyshev_weights(Eigen::Index num_objectives, std::uint64_t seed) {
  if (num_objectives < 2) throw ConfigError("draw_chebyshev_weights: need at least two objectives");
  VectorXd w(num_objectives);
  const std::uint64_t stream = derive_seed(seed, 0x63686562ULL);
  for (Eigen::Index j = 0; j < num_objectives; ++j) {
    const double u = hash_uniform(stream, static_cast<std::uint64_t>(j));
    w(j) = -std::log1p(-u);
  }
  return w / w.sum();
}

}  // namespace saabo
