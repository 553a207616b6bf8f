#include "saabo/linalg.hpp"

#include "saabo/errors.hpp"

#include <cmath>
#include <string>

namespace saabo {

Bounds::Bounds(VectorXd lo, VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw ShapeError("bounds: lower/upper must be non-empty and of equal length");
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!(lower(k) < upper(k))) {
      throw ConfigError("bounds: lower < upper required in dimension " + std::to_string(k));
    }
  }
}

Bounds Bounds::unit_cube(Eigen::Index d) {
  return Bounds(VectorXd::Zero(d), VectorXd::Ones(d));
}

bool Bounds::contains(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != lower.size()) return false;
  return ((x.array() >= lower.array()) && (x.array() <= upper.array())).all();
}

MatrixXd Bounds::project(const MatrixXd& X) const {
  MatrixXd out = X;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = out.row(i).cwiseMax(lower.transpose()).cwiseMin(upper.transpose());
  }
  return out;
}

MatrixXd Bounds::from_unit(const MatrixXd& U) const {
  MatrixXd out(U.rows(), U.cols());
  const VectorXd r = range();
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    out.row(i) = lower.transpose() + U.row(i).cwiseProduct(r.transpose());
  }
  return out;
}

MatrixXd lower_part(const MatrixXd& M) {
  return M.triangularView<Eigen::Lower>();
}

JitteredCholesky cholesky_with_jitter(const MatrixXd& A) {
  if (A.rows() != A.cols()) throw ShapeError("cholesky: matrix must be square");
  const Eigen::Index n = A.rows();
  if (n == 0) return {MatrixXd(0, 0), 0.0};
  if (!A.allFinite()) throw NotPsdError("cholesky: non-finite matrix entries");

  double scale = A.diagonal().cwiseAbs().mean();
  if (!(scale > 0.0)) scale = 1.0;

  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) {
    return {llt.matrixL(), 0.0};
  }
  for (double rel = 1e-8; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    const double jitter = rel * scale;
    MatrixXd Aj = A;
    Aj.diagonal().array() += jitter;
    llt.compute(Aj);
    if (llt.info() == Eigen::Success) {
      MatrixXd L = llt.matrixL();
      if (L.diagonal().minCoeff() > 0.0) return {std::move(L), jitter};
    }
  }
  throw NotPsdError("cholesky: matrix not positive semi-definite after jitter escalation to 1e-4");
}

MatrixXd root_decomposition(const MatrixXd& cov) {
  if (cov.rows() == cov.cols() && cov.isZero(0.0)) return MatrixXd::Zero(cov.rows(), cov.cols());
  return cholesky_with_jitter(cov).L;
}

namespace {

// Lower triangle with the diagonal halved.
MatrixXd phi(const MatrixXd& M) {
  MatrixXd out = M.triangularView<Eigen::Lower>();
  out.diagonal() *= 0.5;
  return out;
}

}  // namespace

MatrixXd cholesky_backward(const MatrixXd& L, const MatrixXd& gL) {
  // An exactly zero factor only arises for a zero covariance; treat it as locally constant.
  if (L.size() > 0 && !(L.diagonal().minCoeff() > 0.0)) return MatrixXd::Zero(L.rows(), L.cols());
  const auto tri = L.triangularView<Eigen::Lower>();
  MatrixXd P = phi(L.transpose() * gL.triangularView<Eigen::Lower>().toDenseMatrix());
  // S = L^{-T} P L^{-1}
  MatrixXd S = tri.transpose().solve(P);
  S = tri.transpose().solve(S.transpose()).transpose();
  return 0.5 * (S + S.transpose());
}

MatrixXd cholesky_forward(const MatrixXd& L, const MatrixXd& dA) {
  const auto tri = L.triangularView<Eigen::Lower>();
  MatrixXd B = tri.solve(dA);
  B = tri.solve(B.transpose()).transpose();
  return L * phi(B);
}

}  // namespace saabo
