#pragma once

#include "saabo/types.hpp"

namespace saabo {

struct JitteredCholesky {
  MatrixXd L;           ///< lower-triangular factor
  double jitter = 0.0;  ///< absolute diagonal jitter that was added
};

/// Cholesky factor of a symmetric PSD matrix. Tries the matrix as given, then
/// adds 1e-8·mean(diag) and escalates by decades up to 1e-4·mean(diag).
/// Throws NotPsdError when the schedule is exhausted.
JitteredCholesky cholesky_with_jitter(const MatrixXd& A);

/// Lower-triangular L with L·Lᵀ = cov (up to the jitter schedule above).
MatrixXd root_decomposition(const MatrixXd& cov);

/// Reverse-mode derivative of the Cholesky factorization. Given the factor L
/// of A and the adjoint gL (only its lower triangle is read), returns the
/// symmetric adjoint of A.
MatrixXd cholesky_backward(const MatrixXd& L, const MatrixXd& gL);

/// Forward-mode derivative: dL for a symmetric perturbation dA of A = L·Lᵀ.
MatrixXd cholesky_forward(const MatrixXd& L, const MatrixXd& dA);

/// Lower triangle (including diagonal) of `M`, upper part zeroed.
MatrixXd lower_part(const MatrixXd& M);

}  // namespace saabo
