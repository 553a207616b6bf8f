#pragma once

#include "saabo/gp_model.hpp"

#include <vector>

namespace saabo {

/// Reparameterized joint posterior samples ξ = μ + L ε of every output of a
/// ModelList at the rows of Z, with the reverse pass back to Z.
///
/// E holds N rows of q·m standard normals in output-major order (column
/// j·q + k feeds output j at point k). Samples share that layout.
class JointSampler {
 public:
  JointSampler(const ModelList& models, const MatrixXd& Z, const MatrixXd& E);

  const MatrixXd& samples() const { return xi_; }
  const VectorXd& mean(std::size_t j) const { return outs_[j].mean; }
  const MatrixXd& root(std::size_t j) const { return outs_[j].L; }

  /// gZ += ∂L/∂Z given G = ∂L/∂ξ (N×q·m).
  void backward(const MatrixXd& G, MatrixXd& gZ) const;

 private:
  struct Output {
    VectorXd mean;
    MatrixXd L;
    CrossCovariance cc;
  };
  const ModelList& models_;
  MatrixXd Z_;
  const MatrixXd& E_;
  std::vector<Output> outs_;
  MatrixXd xi_;
};

}  // namespace saabo
