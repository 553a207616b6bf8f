#pragma once

#include "saabo/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace saabo {

enum class ObjectiveKind { identity, linear, chebyshev, feasibility_weighted, generic };

/// Pointwise g: R^m → R. Must be pure and thread-safe. When `grad` is
/// non-null it receives ∂g/∂y (length m).
using ObjectiveCallback = std::function<double(const VectorXd& y, VectorXd* grad)>;

/// Sample-level objective applied to every posterior sample before the utility.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::identity;
  VectorXd weights;                  ///< linear and chebyshev
  double rho = 0.05;                 ///< chebyshev augmentation
  int objective_index = 0;           ///< feasibility_weighted
  std::vector<int> constraint_indices;
  double tau = 1e-3;                 ///< sigmoid temperature; feasible ⇔ c ≤ 0
  ObjectiveCallback callback;        ///< generic
  int generic_outputs = 1;

  static ObjectiveSpec identity();
  static ObjectiveSpec linear(VectorXd weights);
  static ObjectiveSpec chebyshev(VectorXd weights, double rho = 0.05);
  static ObjectiveSpec feasibility_weighted(int objective_index, std::vector<int> constraint_indices,
                                            double tau = 1e-3);
  static ObjectiveSpec generic(ObjectiveCallback fn, int num_outputs = 1);

  /// True for identity and linear, whose expectation is exact on the mean.
  bool is_affine() const { return kind == ObjectiveKind::identity || kind == ObjectiveKind::linear; }
  /// Weights of the affine map (identity gives [1]).
  VectorXd affine_weights(Eigen::Index m) const;

  /// Throws ConfigError/ShapeError unless the objective accepts m outputs.
  void validate(Eigen::Index m) const;

  /// g(y) for one point; `grad` (optional) receives ∂g/∂y.
  double evaluate_point(const VectorXd& y, VectorXd* grad = nullptr) const;
};

/// Applies g to samples laid out output-major: column j·q + k holds output j
/// at point k. Returns N×q.
MatrixXd apply_objective(const ObjectiveSpec& obj, const MatrixXd& xi, Eigen::Index q);

/// Reverse pass of apply_objective: given G = ∂L/∂g (N×q) returns ∂L/∂ξ with
/// the shape of `xi`.
MatrixXd objective_vjp(const ObjectiveSpec& obj, const MatrixXd& xi, Eigen::Index q, const MatrixXd& G);

/// Flat-Dirichlet weights on the m-simplex (normalized exponentials).
VectorXd draw_chebyshev_weights(Eigen::Index num_objectives, std::uint64_t seed);

/// Numerically stable logistic function.
double sigmoid(double z);

}  // namespace saabo
